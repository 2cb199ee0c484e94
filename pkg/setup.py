#!/usr/bin/env python
"""
Modified from:
https://github.com/pypa/sampleproject
"""

# Always prefer setuptools over distutils
from setuptools import setup, find_packages
from os import path

here = path.abspath(path.dirname(__file__))
# Get the long description from the README file
with open(path.join(here, "README.md"), encoding='utf-8') as dfile:
    long_description = dfile.read()

setup(
    name='rnda',  # Required
    version='0.1.0',  # Required
    description='Real, complex, quaternion and octonion Wishart distributions',  # Optional
    long_description=long_description,  # Optional
    long_description_content_type='text/markdown',
    keywords='random matrices, wishart, hypergeometric functions, jack polynomials',  # Optional
    packages=find_packages(include=['rnda']),
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'scipy',
        'astropy',
        'tqdm',
    ],  # Optional
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': ['rnda=rnda.cli:main'],
    },
)
