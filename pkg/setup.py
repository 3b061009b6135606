"""Build the optional Cython kernels.

The extension is marked optional: if Cython or a C compiler is missing the
package installs without it and falls back to the numpy kernels.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

DIRECTIVES = {
    "language_level": "3",
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "initializedcheck": False,
}

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "warpbridge._kernels",
                ["src/warpbridge/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives=DIRECTIVES,
    )

setup(ext_modules=ext_modules)
