import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the numpy fallback in fraclob._fallback is used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("fraclob._core", ["src/fraclob/_core.pyx"], include_dirs=[np.get_include()])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
