"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure numpy/Python twin is
selected at import time), so a failed compile downgrades to a warning
instead of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: skipping compiled kernels ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(
                f"warning: could not build {ext.name} ({exc}); "
                "falling back to pure-Python kernels",
                file=sys.stderr,
            )


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        return []
    ext = Extension(
        "margbounds.kernels._core",
        ["src/margbounds/kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
