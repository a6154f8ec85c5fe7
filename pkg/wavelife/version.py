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
"""
wavelife versioning utils.

Results depend on the numerical stack as much as on wavelife itself, so
:py:func:`get_version_string` reports both.
"""
import os
import pkg_resources


DISTRIBUTION_NAME = 'wavelife'

# Distributions that affect numerical results
NUMERICAL_STACK = ('numpy', 'scipy', 'matplotlib')


def get_distribution(name=DISTRIBUTION_NAME):
    """
    Get a distribution object.

    An uninstalled wavelife (e.g. a source checkout on sys.path) gets a
    placeholder distribution with version 0.0.0.
    """
    try:
        return pkg_resources.get_distribution(name)
    except pkg_resources.DistributionNotFound:
        return pkg_resources.Distribution(
            project_name=name,
            version='0.0.0',
            location=os.path.dirname(__file__))


def get_version_string():
    """
    :return: e.g. ``wavelife 0.1.0 (numpy 1.26.4, scipy 1.13.0, ...)``
    """
    stack = ', '.join('%s %s' % (name, get_distribution(name).version)
                      for name in NUMERICAL_STACK)
    return '%s %s (%s)' % (DISTRIBUTION_NAME, version, stack)


version = get_distribution().version
