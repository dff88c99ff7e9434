import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dpht._kernels",
                ["src/dpht/_kernels.pyx"],
                include_dirs=[np.get_include()],
                language="c++",
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except ImportError:
    # No Cython: install without the compiled core; the package falls back
    # to the pure-numpy kernels at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
