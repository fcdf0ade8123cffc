"""Build script: compiles the optional Cython stepping kernels.

If the extension cannot be built the install still succeeds and the
package falls back to the pure-numpy kernels at import time.
"""

import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "srbeam.engine._ckernels",
        ["src/srbeam/engine/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
