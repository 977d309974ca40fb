#! /usr/bin/env python

import io
from setuptools import setup, find_packages

descr = """Loewner coefficient dynamics and optimality conditions in pure
Python!"""
DISTNAME = 'pyloewner'
DESCRIPTION = ('Loewner coefficient dynamics, Pontryagin adjoints and '
               'Koebe-optimality conditions for pairs of functionals')
LONG_DESCRIPTION = io.open('README.rst', encoding="utf8").read()
LICENSE = 'new BSD'
VERSION = '0.1.dev0'


if __name__ == "__main__":
    setup(name=DISTNAME,
          description=DESCRIPTION,
          license=LICENSE,
          version=VERSION,
          long_description=LONG_DESCRIPTION,
          packages=find_packages(),
          include_package_data=True,
          zip_safe=False,  # numba caches next to the sources
          install_requires=['numpy>=1.13', 'scipy>=1.7', 'joblib>=0.12',
                            'scikit-learn>=0.20', 'numba>=0.40'],
          extras_require={'test': ['pytest']},
          entry_points={
              'console_scripts': ['pyloewner = pyloewner.cli:main']},
          classifiers=[
              'Intended Audience :: Science/Research',
              'Intended Audience :: Developers',
              'License :: OSI Approved',
              'Programming Language :: Python',
              'Programming Language :: Python :: 3',
              'Topic :: Scientific/Engineering :: Mathematics',
              'Operating System :: POSIX',
              'Operating System :: Unix'
              ]
          )
