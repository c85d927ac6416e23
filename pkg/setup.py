"""Build script for the optional Cython collision kernel.

The extension is marked optional: if it fails to build the package still
installs and falls back to the pure-numpy kernels at import time.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "femlbm.lbm._kernels",
        ["src/femlbm/lbm/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
