"""Build the optional compiled chart kernel; installs without it if Cython is unavailable."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPANQA_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("spanqa.decoder._chart", ["src/spanqa/decoder/_chart.pyx"],
                       include_dirs=[np.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
