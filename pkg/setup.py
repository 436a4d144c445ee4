"""Builds the optional compiled physics kernels.

The package works without the extension (a pure-Python twin of the kernels is
selected at import time); the extension exists because the fixed-step physics
inner loop dominates headless batch runs. -ffp-contract=off keeps the compiled
arithmetic bit-identical to the pure-Python backend (no FMA contraction), which
the replay/state-hash machinery relies on.
"""

import os

import numpy as np
from setuptools import Extension, setup

_PYX = os.path.join(os.path.dirname(__file__), "src", "marun2", "_native_kernels.pyx")

try:
    if not os.path.exists(_PYX):
        raise ImportError("kernel source not present")
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "marun2._native_kernels",
                ["src/marun2/_native_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
