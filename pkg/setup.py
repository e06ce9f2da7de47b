"""Build script for the compiled wave-evaluation kernel.

The package works without the extension: swave._kernels falls back to a
vectorized numpy implementation when the compiled module is absent.
"""
import os

from setuptools import Extension, setup


def make_extensions():
    if os.environ.get("SWAVE_SKIP_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "swave._kernels._wavecore",
        sources=["src/swave/_kernels/_wavecore.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=make_extensions())
