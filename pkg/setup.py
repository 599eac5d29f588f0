"""Builds the optional Cython kernel; the package works without it."""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("gufic._ckernels", ["src/gufic/_ckernels.pyx"],
                   include_dirs=[numpy.get_include()],
                   extra_compile_args=["-O3"])],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
