"""Build script: compiles the optional Cython speedup extension.

The package works without the extension (a pure NumPy fallback is selected
at import time), so a failed compile only costs performance.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "edgeplace._speedups",
                ["src/edgeplace/_speedups.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError as exc:  # pragma: no cover - build environment dependent
    sys.stderr.write(f"edgeplace: skipping compiled kernels ({exc}); "
                     "pure-Python fallback will be used\n")

setup(ext_modules=ext_modules)
