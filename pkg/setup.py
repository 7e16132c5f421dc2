"""Build the optional Cython kernels.

Set ``ENTROMAX_NO_EXT=1`` to skip the extension; the package then runs on
its pure-Python fallback.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ENTROMAX_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "entromax._kernels",
                    ["src/entromax/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
