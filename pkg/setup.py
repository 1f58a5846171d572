import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "wmsense._kernels._core",
                ["src/wmsense/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )
except ImportError:
    # No Cython: install pure-Python only; wmsense._kernels falls back at import.
    ext_modules = []

setup(ext_modules=ext_modules)
