"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input data violates a structural requirement (non-finite, empty, out of range)."""


class InvalidParameterError(ValueError):
    """A configuration parameter is out of its legal range or combination."""


class DegenerateInputError(ValueError):
    """Data is structurally valid but the requested statistic is undefined on it."""
