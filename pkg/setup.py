"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure numpy fallback is selected
at import time); building it just makes the dynamics inner loop much faster:

    python setup.py build_ext --inplace
"""

import os

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    if not os.path.exists("src/amphibori/engine/_core.pyx"):
        raise ImportError("no kernel source")
    ext_modules = cythonize(
        [
            Extension(
                "amphibori.engine._core",
                ["src/amphibori/engine/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
