"""Build script: compiles the optional accelerator extension.

The extension is a convenience, not a requirement. Set MISODETECT_PURE=1
to skip compilation entirely; the package falls back to the numpy
implementations in misodetect._accel._fallback.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MISODETECT_PURE") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "misodetect._accel._speedups",
                    ["src/misodetect/_accel/_speedups.pyx"],
                    include_dirs=[np.get_include()],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
