"""Command-line frontend.

Subcommands: ``test`` (one private hypothesis test, JSON on stdout),
``critval`` (critical-value tables, CSV), ``power`` (power curves, CSV)
and ``qq`` (null p-value quantiles, CSV). Stdout carries machine-readable
output only; diagnostics go to stderr.

Exit codes: 0 success, 2 usage errors, 3 statistically degenerate or
out-of-range input, 4 I/O and parse failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

from .errors import DegenerateInputError, InvalidInputError, InvalidParameterError
from .harness import SimulationSpec, qq_pairs, simulate_power, simulate_type1
from .inference import TEST_KINDS, critical_value, ref_kw, ref_kwabs, ref_mw, ref_t, ref_wilcoxon, run_test
from .privacy import PrivacyBudget
from .rankstats import BoundedSample, GroupedSample, PairedSample
from .streams import RandomStream

MW_DEFAULT_DELTA = 1e-6  # simulation commands only; `test` requires an explicit delta

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4


class ParseError(Exception):
    """Input file cannot be parsed; message carries the line number."""


@dataclass(frozen=True)
class InputSpec:
    path: str
    format: str
    groups: int | None = None


FORMAT_FOR_TEST = {
    "kw": "grouped",
    "kwabs": "grouped",
    "mw": "grouped",
    "wilcoxon": "paired",
    "ttest": "single",
}

_REQUIRED_COLUMNS = {
    "grouped": ("group", "value"),
    "paired": ("u", "v"),
    "single": ("value",),
}


def _parse_float(text, column: str, line: int) -> float:
    if text is None or text == "":
        raise ParseError(f"line {line}: missing value in column '{column}'")
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"line {line}: non-numeric value {text!r} in column '{column}'") from None


def ingest(spec: InputSpec):
    """Read a CSV file into the sample type matching ``spec.format``.

    Group labels map to indices in first-appearance order; ``spec.groups``
    may declare more valid groups than the file shows (they stay empty).
    """
    if spec.format not in _REQUIRED_COLUMNS:
        raise InvalidParameterError(f"unknown input format {spec.format!r}")
    required = _REQUIRED_COLUMNS[spec.format]
    grouped: dict[str, list[float]] = {}
    rows: list[tuple[float, ...]] = []
    with open(spec.path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise ParseError(f"missing required column '{col}' in header {header}")
        for line, row in enumerate(reader, start=2):
            if spec.format == "grouped":
                label = row.get("group")
                if label is None or label == "":
                    raise ParseError(f"line {line}: missing group label")
                grouped.setdefault(label, []).append(_parse_float(row.get("value"), "value", line))
            else:
                rows.append(tuple(_parse_float(row.get(col), col, line) for col in required))

    if spec.format == "grouped":
        if not grouped:
            raise ParseError("input file contains no data rows")
        groups = list(grouped.values())
        declared = spec.groups if spec.groups is not None else len(groups)
        if declared < len(groups):
            raise InvalidInputError(
                f"--groups {declared} is smaller than the {len(groups)} observed groups"
            )
        return GroupedSample(groups, g=declared)
    if not rows:
        raise ParseError("input file contains no data rows")
    if spec.format == "paired":
        return PairedSample(rows=rows)
    return BoundedSample([r[0] for r in rows])


# ---------------------------------------------------------------------------
# Argument plumbing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part != ""]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part != ""]


def _add_budget_flags(p: argparse.ArgumentParser):
    p.add_argument("--test", required=True, choices=TEST_KINDS)
    p.add_argument("--epsilon", required=True, type=float, help="privacy budget (inf = public)")
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--split", type=float, default=None, help="budget fraction per test kind")
    p.add_argument("--reps", type=int, default=100_000, help="reference-distribution size z")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--known-equal-groups", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpht", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one private hypothesis test on a CSV file")
    _add_budget_flags(p_test)
    p_test.add_argument("--input", required=True)
    p_test.add_argument("--format", choices=sorted(_REQUIRED_COLUMNS), default=None)
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--groups", type=int, default=None, help="declared number of valid groups")

    p_crit = sub.add_parser("critval", help="critical-value table by simulation")
    _add_budget_flags(p_crit)
    p_crit.add_argument("--n", required=True, type=_int_list, help="comma-separated sample sizes")
    p_crit.add_argument("--alphas", required=True, type=_float_list)
    p_crit.add_argument("--g", type=int, default=3)
    p_crit.add_argument("--m-star", type=int, default=None, help="mw only; default floor(n/2)")

    p_power = sub.add_parser("power", help="statistical power by simulation")
    _add_budget_flags(p_power)
    p_power.add_argument("--n", required=True, type=_int_list)
    p_power.add_argument("--g", type=int, default=3)
    p_power.add_argument("--effect", type=float, required=True)
    p_power.add_argument("--trials", type=int, default=1000)
    p_power.add_argument("--alpha", type=float, default=0.05)
    p_power.add_argument("--proportions", type=_float_list, default=None)
    p_power.add_argument("--data-shape", choices=("normal", "uniform", "zero-inflated"), default="normal")
    p_power.add_argument("--zero-frac", type=float, default=0.0)

    p_qq = sub.add_parser("qq", help="null p-value QQ pairs")
    _add_budget_flags(p_qq)
    p_qq.add_argument("--n", required=True, type=int)
    p_qq.add_argument("--g", type=int, default=3)
    p_qq.add_argument("--trials", type=int, default=1000)
    p_qq.add_argument("--proportions", type=_float_list, default=None)
    p_qq.add_argument("--data-shape", choices=("normal", "uniform", "zero-inflated"), default="normal")
    p_qq.add_argument("--zero-frac", type=float, default=0.0)

    return parser


def _budget_from_args(args, default_mw_delta: bool) -> PrivacyBudget:
    delta = args.delta
    if args.test == "mw" and not args.known_equal_groups:
        if delta is None and default_mw_delta:
            delta = MW_DEFAULT_DELTA
        if delta is None:
            raise InvalidParameterError(
                "mw requires --delta (or --known-equal-groups for publicly equal groups)"
            )
    return PrivacyBudget(epsilon=args.epsilon, delta=delta if delta is not None else 0.0, split=args.split)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_test(args) -> int:
    budget = _budget_from_args(args, default_mw_delta=False)
    fmt = args.format or FORMAT_FOR_TEST[args.test]
    expected = FORMAT_FOR_TEST[args.test]
    if fmt != expected:
        raise InvalidParameterError(f"test {args.test} requires --format {expected}")
    data = ingest(InputSpec(path=args.input, format=fmt, groups=args.groups))
    rng = RandomStream(args.seed)
    outcome = run_test(
        data,
        args.test,
        budget,
        args.reps,
        rng,
        known_equal=args.known_equal_groups,
    )
    payload = {
        "test": outcome.test,
        "statistic": _json_value(outcome.statistic),
        "p_value": outcome.p_value,
        "n": outcome.n,
        "g": outcome.g,
        "epsilon": _json_value(outcome.epsilon),
        "delta": outcome.delta,
        "split": outcome.split,
        "reps": outcome.z,
        "seed": outcome.seed,
        "reference": outcome.reference,
    }
    if outcome.test == "mw":
        payload["m_tilde"] = _json_value(outcome.m_tilde)
        payload["m_star"] = outcome.m_star
    print(json.dumps(payload))
    return EXIT_OK


def _reference_for_critval(args, n: int, budget: PrivacyBudget, rng: RandomStream):
    if args.test == "kw":
        return ref_kw(args.g, n, budget.epsilon, args.reps, rng)
    if args.test == "kwabs":
        return ref_kwabs(args.g, n, budget.epsilon, args.reps, rng)
    if args.test == "mw":
        m_star = args.m_star if args.m_star is not None else n // 2
        return ref_mw(n, m_star, budget, args.reps, rng, known_equal=args.known_equal_groups)
    if args.test == "wilcoxon":
        return ref_wilcoxon(n, budget.epsilon, args.reps, rng)
    return ref_t(n, budget, args.reps, rng)


def cmd_critval(args) -> int:
    budget = _budget_from_args(args, default_mw_delta=True)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "alpha", "critical_value"])
    rng = RandomStream(args.seed)
    for index, n in enumerate(args.n):
        ref = _reference_for_critval(args, n, budget, rng.child(index))
        for alpha in args.alphas:
            writer.writerow([n, alpha, critical_value(ref, alpha)])
    return EXIT_OK


def _spec_from_args(args, n: int, effect: float, trials: int, alpha: float, budget) -> SimulationSpec:
    return SimulationSpec(
        test=args.test,
        n=n,
        budget=budget,
        trials=trials,
        g=args.g if args.test in ("kw", "kwabs", "mw") else 2,
        proportions=tuple(args.proportions) if args.proportions else None,
        effect=effect,
        data_shape=args.data_shape,
        zero_fraction=args.zero_frac,
        alpha=alpha,
        z=args.reps,
        seed=args.seed,
        known_equal=args.known_equal_groups,
    )


def cmd_power(args) -> int:
    budget = _budget_from_args(args, default_mw_delta=True)
    if args.test == "mw":
        args.g = 2
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n", "epsilon", "power", "se"])
    for n in args.n:
        spec = _spec_from_args(args, n, args.effect, args.trials, args.alpha, budget)
        estimate = simulate_power(spec)
        writer.writerow([n, args.epsilon, estimate.power, estimate.standard_error])
    return EXIT_OK


def cmd_qq(args) -> int:
    budget = _budget_from_args(args, default_mw_delta=True)
    if args.test == "mw":
        args.g = 2
    spec = _spec_from_args(args, args.n, 0.0, args.trials, 0.05, budget)
    theoretical, empirical = qq_pairs(simulate_type1(spec))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["theoretical", "empirical"])
    for t, e in zip(theoretical, empirical):
        writer.writerow([t, e])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "test":
            return cmd_test(args)
        if args.command == "critval":
            return cmd_critval(args)
        if args.command == "power":
            return cmd_power(args)
        return cmd_qq(args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateInputError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
