from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sievekit._kernels",
                ["src/sievekit/_kernels.pyx"],
                # -ffp-contract=off keeps the compiled kernels bit-identical
                # to the numpy fallback (no FMA reassociation).
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Package is fully functional on the pure backend.
    ext_modules = []

setup(ext_modules=ext_modules)
