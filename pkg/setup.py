import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("QSURF_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; the fallback kernels are used
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension(
                "quadsurf._ckernels",
                ["src/quadsurf/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules)
