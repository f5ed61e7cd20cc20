"""Build script for the optional compiled embedding kernel.

The package works without the extension: qwalktree.embed falls back to a
numpy implementation when qwalktree.embed._walkcore is not importable.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "qwalktree.embed._walkcore",
                sources=["src/qwalktree/embed/_walkcore.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
