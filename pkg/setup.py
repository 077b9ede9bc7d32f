"""Builds the optional compiled simulation kernel.

Without Cython the package installs pure-Python and the simulator falls
back to ``aoisrp.simulator._pure``.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "aoisrp.simulator._kernel",
                ["src/aoisrp/simulator/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
