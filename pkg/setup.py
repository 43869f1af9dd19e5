"""Build script. The compiled radio kernel is optional: if Cython or a C
compiler is unavailable the package installs anyway and falls back to the
pure-NumPy kernels at import time."""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "orchid._core._kernels",
                ["src/orchid/_core/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"orchid: skipping compiled kernels ({exc!r}); "
          "pure-NumPy fallback will be used", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
