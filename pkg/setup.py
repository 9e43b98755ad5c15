#!/usr/bin/env python3
"""Installs the ``nilgeo`` command and the HTTP app from backend/."""
from pathlib import Path

from setuptools import find_packages, setup

HERE = Path(__file__).parent


def read_requirements():
    lines = (HERE / "backend" / "requirements.txt").read_text().splitlines()
    runtime = []
    for line in lines:
        line = line.strip()
        if line.startswith("# Development"):
            break
        if line and not line.startswith("#"):
            runtime.append(line)
    return runtime


setup(
    name="nilgeo",
    version="1.0.0",
    description="Exact invariant geometry of complex nilmanifolds",
    long_description=(HERE / "readme.md").read_text(encoding="utf-8"),
    long_description_content_type="text/markdown",
    package_dir={"": "backend"},
    packages=find_packages("backend", exclude=["tests", "tests.*"]),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={"test": ["pytest==7.4.3", "httpx==0.25.2"]},
    entry_points={"console_scripts": ["nilgeo=app.cli:main"]},
)
