import os
import re

import setuptools


def get_requirements(req_path: str):
    with open(req_path, encoding="utf8") as f:
        return [line for line in f.read().splitlines() if line and not line.startswith("#")]


def get_long_description():
    base_dir = os.path.abspath(os.path.dirname(__file__))
    with open(os.path.join(base_dir, "README.md"), encoding="utf-8") as f:
        return f.read()


def get_metadata(key: str):
    current_dir = os.path.abspath(os.path.dirname(__file__))
    init_file = os.path.join(current_dir, "entroscan", "__init__.py")
    with open(init_file, encoding="utf-8") as f:
        return re.search(rf'^__{key}__ = [\'"]([^\'"]*)[\'"]', f.read(), re.M).group(1)


setuptools.setup(
    name="entroscan",
    version=get_metadata("version"),
    author=get_metadata("author"),
    author_email="kadir.nar@hotmail.com",
    license=get_metadata("license"),
    description=get_metadata("summary"),
    long_description=get_long_description(),
    long_description_content_type="text/markdown",
    url=get_metadata("url"),
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    install_requires=get_requirements("requirements.txt"),
    extras_require={"test": ["pytest", "hypothesis"]},
    entry_points={"console_scripts": ["entroscan = entroscan.cli:main"]},
    python_requires=">=3.8",
)
