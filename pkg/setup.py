"""Build script.

The compiled kernel extension is optional: when Cython or a C compiler is
missing the package installs anyway and falls back to the numpy kernels at
import time (see axiolearn._kernels).
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("AXIOLEARN_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "axiolearn._kernels._native",
                    ["src/axiolearn/_kernels/_native.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
