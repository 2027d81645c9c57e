"""Build script: compiles the optional C kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); set TESC_NO_EXTENSION=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TESC_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tesc._kernels._ckern",
                    sources=["src/tesc/_kernels/_ckern.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
