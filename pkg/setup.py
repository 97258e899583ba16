"""Build script: compiles the optional serialization kernels when Cython is present.

The package is fully functional without the compiled extension; a pure-Python
twin of the kernel module is selected at import time as a fallback.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/ledgergate/_kernels/_speedups.pyx"],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
