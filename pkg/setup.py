import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KINEMETRICA_NO_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "kinemetrica._kernels",
                ["src/kinemetrica/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
