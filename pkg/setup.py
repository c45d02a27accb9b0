from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np

ext = Extension("refkit._ckernels", ["src/refkit/_ckernels.pyx"], include_dirs=[np.get_include()])

setup(ext_modules=cythonize(ext, language_level=3))
