from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "relrate._relrate",
    sources=[
        "src/space.cpp",
        "src/static_core.cpp",
        "src/lp.cpp",
        "src/choice.cpp",
        "src/tree.cpp",
        "src/decompose.cpp",
        "src/market.cpp",
        "src/monte_carlo.cpp",
        "src/scenario.cpp",
        "python/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_compile_args=["-pthread"],
    extra_link_args=["-pthread"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
