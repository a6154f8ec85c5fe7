#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# This file is part of wavelife.
# Copyright (C) 2024-2026 University of Oslo, Norway
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
import glob
import io
import os
import shutil

import setuptools
from distutils.command.clean import clean as clean_command


here = os.path.abspath(os.path.dirname(__file__))

# Build and test artifacts removed by `setup.py clean`
CLEAN_PATTERNS = (
    '.eggs/',
    '.pytest_cache/',
    '.tox/',
    '*.egg-info/',
    'build/',
    'dist/',
    'docs/build/',
    'junit-*.xml',
    '**/__pycache__/',
    '**/*.pyc',
)


def get_requirements(filename):
    """ Read requirements from file, without comments. """
    with io.open(os.path.join(here, filename), mode='rt',
                 encoding='utf-8') as f:
        lines = (line.partition('#')[0].strip() for line in f)
        return [line for line in lines if line]


def get_textfile(filename):
    """ Get contents from a text file. """
    with io.open(os.path.join(here, filename), mode='rt',
                 encoding='utf-8') as f:
        return f.read().lstrip()


class Clean(clean_command):
    """Remove build, test and documentation artifacts."""

    def run(self):
        super(Clean, self).run()
        for pattern in CLEAN_PATTERNS:
            for path in glob.glob(os.path.join(here, pattern),
                                  recursive=True):
                if os.path.isdir(path):
                    shutil.rmtree(path, ignore_errors=True)
                elif os.path.exists(path):
                    os.remove(path)


def main():
    setuptools.setup(
        name='wavelife',
        description='Lifespan experiments for weighted semilinear waves',
        long_description=get_textfile('README.md'),
        long_description_content_type='text/markdown',

        url='https://github.com/unioslo/wavelife',
        author='University of Oslo',
        license='GPLv3',

        use_scm_version={'fallback_version': '0.1.0'},
        python_requires='>=3.8',

        setup_requires=['setuptools_scm'],
        install_requires=get_requirements('requirements.txt'),
        extras_require={
            'test': get_requirements('requirements-test.txt'),
            'docs': get_requirements('docs/requirements.txt'),
        },

        packages=setuptools.find_packages(
            '.', include=('wavelife', 'wavelife.*')),
        data_files=[('share/wavelife', ['data/quartic-bump.csv', ]), ],
        entry_points={
            'console_scripts': [
                'pywavelife = wavelife.cli:main',
            ],
        },
        classifiers=[
            'Development Status :: 4 - Beta',
            'Environment :: Console',
            'Intended Audience :: Science/Research',
            'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
            'Programming Language :: Python :: 3',
            'Topic :: Scientific/Engineering :: Mathematics',
        ],
        keywords='wave equation blow-up lifespan numerics',
        cmdclass={
            'clean': Clean,
        },
    )


if __name__ == '__main__':
    main()
