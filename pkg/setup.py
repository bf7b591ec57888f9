import os

from setuptools import setup

# The compiled kernel is optional: the package falls back to the pure-Python
# implementation in zgraded/_kernel_py.py when the extension is absent.
ext_modules = []
if os.environ.get("ZGRADED_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/zgraded/_kernel_c.pyx"],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
