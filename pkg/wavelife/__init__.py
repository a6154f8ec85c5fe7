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
The wavelife library
--------------------

The wavelife library is a numerical laboratory for the lifespan of small
solutions of the weighted semilinear wave equation

::

    u_tt - u_xx = F(u) / (1 + x**2) ** ((1 + a) / 2),   x in R, t > 0

It is the main component of the wavelife distribution, and can be used to
script experiments beyond what the pywavelife cli script offers.

Typical usage would look something like:

.. code:: python

    import wavelife
    spec = wavelife.make_spec(a=1, p=2, eps=0.1)
    record = wavelife.harness.run_blowup(spec, h=0.01, T_budget=200)
    print(record.T_extrapolated)
    print(wavelife.blowup.upper_lifespan_bound(spec))

"""
import logging

from . import blowup
from . import harness
from . import picard
from . import problem
from . import quadrature
from . import version


__all__ = ['make_spec', 'blowup', 'harness', 'picard', 'problem',
           'quadrature']
__version__ = version.version

logger = logging.getLogger(__name__)


def make_spec(a, p, eps, data='cos2-bump', nonlinearity='abs-pow',
              mode=problem.ProblemSpec.BLOWUP):
    """Create a problem spec from names and numbers

    :type a: float
    :param a: The weight exponent, a >= -1

    :type p: float
    :param p: The nonlinearity exponent, p > 1

    :type eps: float
    :param eps: The data amplitude

    :type data: str, wavelife.problem.InitialData
    :param data: Initial data, or a name for :py:func:`problem.named_data`

    :rtype: wavelife.problem.ProblemSpec
    :return: New problem spec

    :raises ValueError: if the problem violates the lifespan hypotheses
    """
    logger.debug('make_spec(a=%r, p=%r, eps=%r, data=%r)', a, p, eps, data)
    if not isinstance(data, problem.InitialData):
        data = problem.named_data(data)
    spec = problem.ProblemSpec(
        a=float(a),
        eps=float(eps),
        nonlinearity=problem.Nonlinearity.from_name(nonlinearity, p),
        data=data,
        mode=mode)
    violations = problem.validate_spec(spec)
    if violations:
        raise ValueError('; '.join(violations))
    return spec
