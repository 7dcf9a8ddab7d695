from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "platoonmac._core",
    sources=[
        "src/platoon.cpp",
        "src/traffic.cpp",
        "src/edca.cpp",
        "src/delay.cpp",
        "src/des.cpp",
        "src/scenario.cpp",
        "src/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
