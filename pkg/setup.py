import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DIVLAB_NO_EXTENSION") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("divlab._ckernels", ["src/divlab/_ckernels.pyx"],
                   include_dirs=[np.get_include()],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
