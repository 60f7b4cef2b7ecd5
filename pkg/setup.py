"""Build script: optionally compile the hot execution module with Cython.

The package is pure Python and fully functional without a compiler; the
compiled variant of ``horndl.engine`` roughly halves query runtimes on
deep derivation chains.  Any failure to cythonize or compile falls back
to the interpreted module.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/horndl/engine.py"],
        language_level=3,
        quiet=True,
    )
    for ext in ext_modules:
        ext.optional = True
except Exception:
    pass

setup(ext_modules=ext_modules)
