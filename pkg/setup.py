"""Optional compiled event loop; installation falls back to pure Python if the build fails."""
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler or no Cython
            print(f"warning: compiled kernel not built ({exc}); using the pure-Python kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using the pure-Python kernel")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(["src/axsr/desim/_kernel.py"], language_level=3, quiet=True,
                     compiler_directives={"boundscheck": False, "wraparound": False,
                                          "cdivision": True, "initializedcheck": False})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
