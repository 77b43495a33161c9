"""Build script for the optional Cython scheduling engine.

The package works without the extension (a pure-Python engine is selected at
import time); the extension only accelerates the dynamic-programming inner
loop for large workloads.
"""
import sys

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "hetsched._engine._engine_cy",
                ["src/hetsched/_engine/_engine_cy.pyx"],
                # -ffp-contract=off keeps float results bit-identical to
                # the pure-Python engine (no FMA contraction)
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython not available; building pure-Python hetsched", file=sys.stderr)

setup(ext_modules=ext_modules)
