"""Build script for the optional compiled kernel core.

The package works without the extension (pure numpy fallback is selected
at import time), so a failed extension build is downgraded to a warning.
"""

import warnings

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize

    # -ffp-contract=off keeps the compiled kernels bitwise identical to the
    # numpy fallback (no FMA contraction of a*b+c).
    ext_modules = cythonize(
        "src/oldb2d/kernels/_core.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.extra_compile_args += ["-O3", "-ffp-contract=off"]
except Exception as exc:  # pragma: no cover
    warnings.warn(f"compiled kernels disabled: {exc}")
    ext_modules = []

setup(ext_modules=ext_modules)
