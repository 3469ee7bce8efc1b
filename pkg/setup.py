"""Build hook for the optional compiled filter kernel.

The package is fully functional without the extension: hsindt._kernels
falls back to a vectorised numpy implementation at import time.  If
Cython or a C compiler is unavailable the build proceeds pure-Python.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/hsindt/_kernels/_jbf_cy.pyx"],
        language_level=3,
    )
    include_dirs = [numpy.get_include()]
    for ext in ext_modules:
        ext.include_dirs.extend(include_dirs)
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
except ImportError:
    pass

setup(ext_modules=ext_modules)
