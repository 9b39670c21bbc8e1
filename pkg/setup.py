"""Build script: compiles the optional Cython kernel core.

The package works without the extension (pure-numpy fallback is selected at
import time), so a failed compile only costs speed, not functionality.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/znl/_kernels/_core.pyx",
        language_level="3",
        compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
except Exception as exc:  # pragma: no cover
    sys.stderr.write(f"znl: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
