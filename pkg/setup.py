import os
import platform

import numpy as np
from setuptools import Extension, setup

ext_modules = []
_cflags = ["-O3"]
if platform.machine() in ("x86_64", "AMD64"):
    _cflags.append("-mpopcnt")

if not os.environ.get("INFOLAG_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "infolag._ckernels",
                    ["src/infolag/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=_cflags,
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
