from setuptools import Extension, setup

# optional: matching falls back to pure Python when the compiler is unavailable
setup(ext_modules=[Extension("neuroscore._editdistance", ["src/neuroscore/_editdistance.c"], optional=True)])
