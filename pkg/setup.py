"""
Setup script for the STV Audit Engine

This script allows the engine and its command line to be installed as a
Python package.
"""

from setuptools import setup


# Read the README file
def read_readme():
    with open("README.md", "r", encoding="utf-8") as f:
        return f.read()


# Read requirements
def read_requirements():
    with open("requirements.txt", "r", encoding="utf-8") as f:
        return [line.split("#")[0].strip() for line in f if line.strip() and not line.startswith("#")]


setup(
    name="stv-audit",
    version="1.0.0",
    description="Multi-ruleset STV counting engine with anomaly detectors and a manipulation search",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    py_modules=[
        "analysis",
        "ballot_token",
        "config",
        "engine",
        "error_handler",
        "lexer",
        "main",
        "model",
        "parser",
        "performance",
        "rational",
        "rules",
        "test_runner",
        "transcript_io",
    ],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.10",
    install_requires=[],
    extras_require={
        "test": read_requirements(),
        "dev": read_requirements() + [
            "pytest-cov>=4.0.0",
            "black>=22.0.0",
            "flake8>=5.0.0",
            "mypy>=1.0.0",
        ],
        "profiling": [
            "psutil>=5.9.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "stv-audit=main:main",
            "stv-audit-test=test_runner:main",
            "stv-audit-bench=performance:run_performance_suite",
        ],
    },
    include_package_data=True,
    package_data={
        "": ["tests/*.elec"],
    },
)
