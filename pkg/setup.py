#!/usr/bin/env python3

"""Setup script"""

from setuptools import setup, find_packages

setup(
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['test']),
    package_data={
        'knotscope.test': ['*.yml', '*.jsonl'],
    },
    use_scm_version={
        'fallback_version': '0.1.0',
    },
    setup_requires=[
        'setuptools_scm',
    ],
    install_requires=[
        'numpy',
        'pyyaml',
        'scipy',
        'sympy',
    ],
    python_requires='>=3.9',
    entry_points={
        'console_scripts': [
            'knotscope=knotscope.cli:main',
        ],
    },
    test_suite='test',
)
