import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# FHP_NO_EXT=1 skips the compiled core; the package then runs on fhp._pykernels.
if os.environ.get("FHP_NO_EXT"):
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fhp._core",
                ["src/fhp/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
