"""Build hook: compile the optional _kernels extension when Cython is available.

The package is fully functional without the extension (causalfields.backend
falls back to the numpy kernels), so any failure here is non-fatal.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/causalfields/_kernels.pyx",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )
    import numpy

    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        # keep scalar arithmetic order identical to the numpy kernels
        ext.extra_compile_args += ["-O2", "-ffp-contract=off"]
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"causalfields: skipping compiled kernels ({exc!r})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
