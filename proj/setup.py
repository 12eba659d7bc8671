import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        import pybind11

        ext_path = Path(self.get_ext_fullpath(ext.name)).resolve()
        ext_path.parent.mkdir(parents=True, exist_ok=True)
        build_temp = Path(self.build_temp).resolve()
        build_temp.mkdir(parents=True, exist_ok=True)
        source = Path(__file__).parent.resolve()

        subprocess.run(
            [
                "cmake",
                str(source),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DLSFLOW_BUILD_PYTHON=ON",
                f"-Dpybind11_DIR={pybind11.get_cmake_dir()}",
                f"-DPython_EXECUTABLE={sys.executable}",
            ],
            cwd=build_temp,
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", ".", "--target", "lsflow_py", "--parallel"],
            cwd=build_temp,
            check=True,
        )

        built = sorted((build_temp / "python" / "lsflow").glob("_core*.so"))
        if not built:
            raise RuntimeError("CMake did not produce the _core extension")
        self.copy_file(str(built[-1]), str(ext_path))


setup(
    name="lsflow",
    version="0.1.0",
    description="Level-set interpolation between point-cloud pairs",
    packages=["lsflow"],
    package_dir={"": "python"},
    ext_modules=[CMakeExtension("lsflow._core")],
    cmdclass={"build_ext": CMakeBuild},
    python_requires=">=3.8",
)
