"""Build the optional Cython kernels.

The extension is marked optional: when no C compiler is available the
package installs without it and the pure-numpy kernels are used instead.
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

CFLAGS = ["-O3", "-ffp-contract=off"]

kernels = Extension(
    "nssetd._ckernels",
    ["src/nssetd/_ckernels.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=CFLAGS,
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    optional=True,
)

setup(
    ext_modules=cythonize(
        [kernels],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
            "nonecheck": False,
        },
    )
)
