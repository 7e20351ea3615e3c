import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WENONN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "wenonn._kernels",
                    ["src/wenonn/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no FMA contraction or fast-math: the kernels must stay
                    # IEEE-reproducible run to run
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
