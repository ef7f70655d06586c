"""Optional compiled-kernel build.

The package is pure Python; the Cython extension in jarvis_kg._speed only
accelerates the edit-distance and polyline-distance inner loops. If Cython
or a C compiler is unavailable the extension is skipped and the pure-Python
fallback is used at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "jarvis_kg._speed._kernels",
                ["src/jarvis_kg/_speed/_kernels.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
