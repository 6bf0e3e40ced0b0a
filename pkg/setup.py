"""PyPI setup script

Script includes primary Python package along with its
non-Python files, the JSON schemas of the wire formats.

Usage:
    >>> python setup.py sdist
    ...

"""

import os
from setuptools import setup, find_packages

with open("README.txt") as f:
    readme = f.read()

version_file = os.path.abspath("sprtree/version.py")
version_mod = {}
with open(version_file) as f:
    exec(f.read(), version_mod)
version = version_mod["version"]

classifiers = [
    "Development Status :: 3 - Alpha",
    "Intended Audience :: Science/Research",
    "License :: OSI Approved :: GNU Lesser General Public License v3 (LGPLv3)",
    "Programming Language :: Python",
    "Programming Language :: Python :: 3",
    "Programming Language :: Python :: 3.8",
    "Programming Language :: Python :: 3.9",
    "Programming Language :: Python :: 3.10",
    "Programming Language :: Python :: 3.11",
    "Topic :: Scientific/Engineering :: Mathematics",
    "Topic :: Utilities"
]

setup(
    name="sprtree",
    version=version,
    description="Subtree prune and regraft dynamics on weighted real trees",
    long_description=readme,
    license="LGPL",
    packages=find_packages(exclude=["tests"]),
    zip_safe=False,
    classifiers=classifiers,
    python_requires=">=3.8",
    package_data={
        "sprtree.formats": [
            "schema/*.json",
        ]
    },
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.7",
        "networkx>=2.5",
        "joblib>=1.0",
        "jsonschema>=3.2",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": ["sprtree = sprtree.app:main"],
    },
)
