import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; ntsearch falls back at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("NTSEARCH_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "ntsearch._kernels",
                ["src/ntsearch/_kernels.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math / FMA contraction: kernels must match the Python path bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
