#!/usr/bin/env python

import re
from setuptools import setup, find_packages
import sys
import warnings

if sys.version_info[:3] < (3, 8, 0):
    warnings.warn("fuelgen does not officially support versions below "
                  "Python 3.8.0", RuntimeWarning)

# the version is kept in a seperate file and gets parsed - this
# way, setup.py doesn't have to import the package (and numpy with it).

VERSIONFILE = 'fuelgen/_version.py'

version_line = open(VERSIONFILE).read()
version_re = r"^__version__ = ['\"]([^'\"]*)['\"]"
match = re.search(version_re, version_line, re.M)
if match:
    version = match.group(1)
else:
    raise RuntimeError("Could not find version in '%s'" % VERSIONFILE)

setup(
    name='fuelgen',
    version=version,
    packages=find_packages(exclude=['examples', 'examples.*']),
    scripts=[],
    license='BSD 3-Clause',
    description='Calibrated stochastic generation of heterogeneous mid-story fuel layouts.',
    long_description=open('README.rst').read(),
    install_requires=[
        'validictory >= 0.8.0, != 0.9.2',         # error messages
        'decorator >= 3.3.1',                     # > 3.0 likely work, but not on pypi
        'proboscis >= 1.2.5.1',                   # runs_after
        'appdirs >= 1.1.0',                       # user_log_dir
        'numpy >= 1.17',                          # Generator, SeedSequence.spawn_key
        'scipy >= 1.6',                           # KD-tree ndarray outputs, truncnorm Generator
        'esda >= 2.3',                            # Moran, Geary
        'libpysal >= 4.3',                        # lat2W
        'Pillow >= 9.1',                          # Image.Resampling
    ],
    entry_points={
        'console_scripts': ['fuelgen = fuelgen.cli:main'],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering',
        'Topic :: Software Development :: Libraries :: Python Modules',
    ],
    include_package_data=True,
    zip_safe=False,
)
