# Builds the optional Cython stepping kernels.  The package works without
# them (pure-numpy fallback selected at import), so a failed extension
# build must not fail the install.
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: building radnls._stepkern failed ({exc}); "
                  "falling back to the pure-python kernels", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc})", file=sys.stderr)


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [Extension(
            "radnls._stepkern",
            ["src/radnls/_stepkern.pyx"],
            include_dirs=[numpy.get_include()],
            # -fcx-limited-range: plain complex multiply/divide (no inf/nan
            # recovery branches); the kernels never produce non-finite values
            extra_compile_args=["-O3", "-fcx-limited-range"],
        )],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
