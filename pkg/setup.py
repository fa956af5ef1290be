import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FASTALG_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # pure-Python install; fastalg.vm falls back at import
        pass
    else:
        ext_modules = cythonize(
            ["src/fastalg/_vmcore.pyx"],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
