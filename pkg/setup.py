"""Build script: compiles the hot SGD kernel unless SWARMIDS_SKIP_EXT=1.

The package works without the extension (a pure-Python twin is selected at
import time), it is just much slower on large training sets.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SWARMIDS_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        # -ffp-contract=off keeps the compiled kernel bit-identical to the
        # pure-Python fallback (no FMA fusion of a*b+c).
        ext_modules = cythonize(
            [
                Extension(
                    "swarmids._kernels._hinge_sgd",
                    ["src/swarmids/_kernels/_hinge_sgd.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
