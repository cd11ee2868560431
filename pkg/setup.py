"""Build script: compiles the optional native kernel extension.

The package works without the extension (a pure-Python fallback is
selected at import time), so a missing compiler only costs speed.
"""

import logging

from setuptools import Extension, setup

log = logging.getLogger("textsleuth.setup")


def native_extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        log.warning("Cython unavailable, building without native kernels")
        return []
    ext = Extension(
        "textsleuth._kernels._native",
        sources=["src/textsleuth/_kernels/_native.pyx"],
        language="c++",
        extra_compile_args=["-O2", "-std=c++11"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=native_extensions())
