"""Build the optional compiled split-search kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes boosted-tree training faster:

    pip install -e . --no-build-isolation
    # or, in place:
    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "promptgauge._kernels._split",
                sources=["src/promptgauge/_kernels/_split.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": False,
            "language_level": "3",
        },
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
