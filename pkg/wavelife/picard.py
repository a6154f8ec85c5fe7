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
Constructive small data existence.

The solution of the integral equation ``u = eps * u0 + L(H(., u))`` is
approximated on a finite lattice by the Picard iteration

::

    u_1 = eps * u0
    u_n = eps * u0 + L(H(., u_(n-1)))

and certified on [0, T] when

::

    2**(p+1) * p * C_a * D(T) * M**(p-1) * eps**(p-1) <= 1

holds for a constant C_a with ``|L(V)| <= C_a * D(T) * sup|V|``.  Under that
condition the iteration contracts with ratio at most 1/2 and stays bounded by
``2 * M * eps``.

The constant C_a is measured (see
:py:func:`wavelife.quadrature.operator_constant`), never derived, so every
certificate is empirical.
"""
import collections
import logging
import math

import numpy as np

from .quadrature import (
    DampingProfile,
    duhamel_grid,
    free_solution_row,
    operator_constant,
    weight,
)

logger = logging.getLogger(__name__)


# Iteration cap
MAX_ITERATIONS = 60

# Default tolerance, relative to M * eps
TOL_FACTOR = 1e-8

# Contraction ratio allowed on the lattice (1/2 plus 10% slack)
RATIO_LIMIT = 0.5 * (1 + 0.1)

# Safety factor applied to measured operator constants
DEFAULT_SAFETY = 2.0

# Differences below this fraction of M * eps are not used for ratios
RATIO_FLOOR = 1e-12


class PicardError(Exception):
    """Base class for Picard iteration errors."""
    pass


class GeometryError(PicardError):
    """Grid functions do not share a lattice."""
    pass


class IterationDiverged(PicardError):
    """An iterate left the ball of radius 4 * M * eps."""
    pass


class IterationStagnated(PicardError):
    """No convergence within the iteration cap."""
    pass


class GridFunction(object):
    """
    Values on a characteristic lattice.

    Node (i, k) sits at ``(x_min + i*h, k*h)``.  Rows are stored as a
    read-only 2D array of shape (time levels, nodes).
    """

    def __init__(self, h, x_min, rows):
        rows = np.array(rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2D array, got shape %r" %
                             (rows.shape, ))
        if not np.all(np.isfinite(rows)):
            raise ValueError("grid function values must be finite")
        rows.setflags(write=False)
        self.h = float(h)
        self.x_min = float(x_min)
        self.rows = rows

    def __repr__(self):
        return ('<{cls.__name__} h={obj.h!r} x=[{obj.x_min!r}, '
                '{obj.x_max!r}] t_max={obj.t_max!r}>').format(
                    cls=type(self), obj=self)

    @property
    def x_max(self):
        return self.x_min + (self.rows.shape[1] - 1) * self.h

    @property
    def t_max(self):
        return (self.rows.shape[0] - 1) * self.h

    @property
    def xs(self):
        return self.x_min + np.arange(self.rows.shape[1]) * self.h

    @property
    def times(self):
        return np.arange(self.rows.shape[0]) * self.h

    @classmethod
    def from_function(cls, func, h, x_min, x_max, t_max):
        """Sample func(xs, t) on every row of a lattice."""
        nodes = int(round((x_max - x_min) / h)) + 1
        steps = int(round(t_max / h))
        xs = x_min + np.arange(nodes) * h
        rows = [np.broadcast_to(np.asarray(func(xs, k * h), dtype=float),
                                xs.shape)
                for k in range(steps + 1)]
        return cls(h, x_min, rows)

    def same_geometry(self, other):
        return (self.rows.shape == other.rows.shape and
                abs(self.h - other.h) <= 1e-12 * self.h and
                abs(self.x_min - other.x_min) <= 1e-9 * self.h)

    def with_rows(self, rows):
        return type(self)(self.h, self.x_min, rows)


ExistenceCertificate = collections.namedtuple(
    'ExistenceCertificate',
    ('T_star', 'contraction_ratio', 'C_a_used', 'M', 'eps', 'iterations',
     'residual', 'max_norm', 'T', 'truncated'))

Horizon = collections.namedtuple('Horizon', ('value', 'certified', 'C_a'))

IterationLog = collections.namedtuple(
    'IterationLog', ('u', 'differences', 'ratios', 'norms'))


def sup_norm(u):
    """Largest absolute value over all nodes of a grid function."""
    if u.rows.size == 0:
        return 0.0
    return float(np.max(np.abs(u.rows)))


def _sup_difference(u, v):
    if u.rows.size == 0:
        return 0.0
    return float(np.max(np.abs(u.rows - v.rows)))


def picard_step(spec, u_prev, u0_grid):
    """
    One Picard step, ``u0_grid + L(H(., u_prev))``.

    :type spec: wavelife.problem.ProblemSpec
    :type u_prev: GridFunction
    :param u0_grid: eps * u0 sampled on the lattice of u_prev

    :raises GeometryError: if the lattices differ
    :raises IterationDiverged: if the step produces non-finite values
    """
    if not u_prev.same_geometry(u0_grid):
        raise GeometryError("lattice mismatch: %r vs %r" % (u_prev, u0_grid))
    with np.errstate(over='ignore', invalid='ignore'):
        source = spec.nonlinearity(u_prev.rows) * weight(spec.a, u_prev.xs)
        rows = u0_grid.rows + duhamel_grid(source, u_prev.h)
    if not np.all(np.isfinite(rows)):
        raise IterationDiverged("non-finite values in Picard step")
    return u0_grid.with_rows(rows)


def _data_scale(spec):
    data = spec.data
    return data.sup_f + data.l1_g


def certified_horizon(spec, C_a):
    """
    Largest T satisfying the existence condition for a given constant.

    :type spec: wavelife.problem.ProblemSpec
    :param float C_a: operator constant (with any safety factor applied)

    :rtype: Horizon
    :return:
        the horizon; ``certified`` is False (and the value 0) if the
        condition already fails at T = 0
    """
    p = spec.p
    M = _data_scale(spec)
    if spec.eps == 0 or M == 0:
        return Horizon(math.inf, True, C_a)
    bound = 1.0 / (2.0 ** (p + 1) * p * C_a * M ** (p - 1) *
                   spec.eps ** (p - 1))
    horizon = DampingProfile(spec.a).inverse(bound)
    if horizon is None:
        logger.info('no certified horizon for eps=%r, C_a=%r', spec.eps, C_a)
        return Horizon(0.0, False, C_a)
    return Horizon(horizon, True, C_a)


def measured_horizon(spec, safety=DEFAULT_SAFETY, resolution=12, rtol=1e-3):
    """
    Self-consistent certified horizon.

    Finds (by doubling and bisection) the largest T such that
    :py:func:`certified_horizon` with the operator constant measured on
    [0, T], times ``safety``, is at least T.

    :rtype: Horizon
    """
    a = spec.a
    if spec.eps == 0 or _data_scale(spec) == 0:
        return Horizon(math.inf, True, math.nan)

    def constant(T):
        return safety * operator_constant(a, T, resolution)

    def fits(T):
        return certified_horizon(spec, constant(T)).value >= T

    lo, hi = 0.0, 1.0
    while fits(hi):
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            break
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    if lo == 0:
        logger.info('no measured horizon for eps=%r', spec.eps)
        return Horizon(0.0, False, math.nan)
    logger.debug('measured_horizon(eps=%r) -> %r', spec.eps, lo)
    return Horizon(lo, True, constant(lo))


def lattice_u0(spec, h, T):
    """
    Sample eps * u0 on the lattice used by :py:func:`picard_solve`.

    Compactly supported data live on [-(R + T), R + T], which is exact by
    finite propagation speed.  Other data are truncated at the data cutoff.

    :rtype: GridFunction
    """
    data = spec.data
    steps = int(math.floor(T / h + 1e-9))
    t_max = steps * h
    radius = (data.support_radius + t_max) if data.compact else data.cutoff
    half = int(math.ceil(radius / h - 1e-9))
    x_min = -half * h
    xs = x_min + np.arange(2 * half + 1) * h
    rows = [spec.eps * free_solution_row(data, xs, k * h)
            for k in range(steps + 1)]
    return GridFunction(h, x_min, rows)


def picard_iterate(spec, u0_grid, tol, bound=None):
    """
    Run the Picard iteration from u_1 = u0_grid until successive iterates
    differ by at most tol.

    :param bound: sup norm that counts as divergence (default 4 * M * eps)

    :rtype: IterationLog
    :raises IterationDiverged: if an iterate exceeds the bound
    :raises IterationStagnated: if :py:const:`MAX_ITERATIONS` is exceeded
    """
    scale = _data_scale(spec) * spec.eps
    if bound is None:
        bound = 4 * scale
    floor = RATIO_FLOOR * scale
    u = u0_grid
    differences, ratios, norms = [], [], [sup_norm(u0_grid)]
    for iteration in range(1, MAX_ITERATIONS + 1):
        u_next = picard_step(spec, u, u0_grid)
        norms.append(sup_norm(u_next))
        if norms[-1] > bound:
            raise IterationDiverged(
                "iterate %d has sup norm %r > %r" %
                (iteration, norms[-1], bound))
        difference = _sup_difference(u_next, u)
        if differences and differences[-1] > floor:
            ratios.append(difference / differences[-1])
        differences.append(difference)
        u = u_next
        logger.debug('picard iteration %d: difference=%r', iteration,
                     difference)
        if difference <= tol:
            break
    else:
        raise IterationStagnated(
            "no convergence in %d iterations (last difference %r)" %
            (MAX_ITERATIONS, differences[-1]))
    logger.info('picard iteration converged after %d steps', len(differences))
    return IterationLog(u, differences, ratios, norms)


def picard_solve(spec, h, T, tol=None, C_a=None, safety=DEFAULT_SAFETY):
    """
    Solve the integral equation on [0, T] and try to certify the result.

    :type spec: wavelife.problem.ProblemSpec
    :param float h: lattice spacing
    :param float T: time horizon (rounded down to a multiple of h)
    :param float tol: stopping tolerance (default 1e-8 * M * eps)
    :param float C_a:
        operator constant for the certificate, or None to use
        :py:func:`measured_horizon`

    :rtype: tuple
    :return:
        (u, certificate), where certificate is None if T exceeds the
        certified horizon or a contraction ratio exceeds
        :py:const:`RATIO_LIMIT`
    """
    logger.debug('picard_solve(%r, h=%r, T=%r, tol=%r, C_a=%r)',
                 spec, h, T, tol, C_a)
    data = spec.data
    M = _data_scale(spec)
    if tol is None:
        tol = TOL_FACTOR * M * spec.eps
    u0_grid = lattice_u0(spec, h, T)
    result = picard_iterate(spec, u0_grid, tol)
    u = result.u

    residual = _sup_difference(picard_step(spec, u, u0_grid), u)
    if not data.compact:
        tail = spec.eps * data.tail_mass(data.cutoff - u.t_max)
        logger.warning('lattice truncated at |x| = %r, adding tail estimate '
                       '%r to the residual', data.cutoff, tail)
        residual += tail

    if C_a is None:
        horizon = measured_horizon(spec, safety=safety)
    else:
        horizon = certified_horizon(spec, C_a)
    worst = max(result.ratios) if result.ratios else 0.0

    if not horizon.certified or u.t_max > horizon.value:
        logger.info('certificate withheld: T=%r beyond horizon %r',
                    u.t_max, horizon.value)
        return u, None
    if worst > RATIO_LIMIT:
        logger.warning('certificate withheld: contraction ratio %r > %r',
                       worst, RATIO_LIMIT)
        return u, None
    logger.warning('certificate uses an empirical constant C_a=%r',
                   horizon.C_a)
    certificate = ExistenceCertificate(
        T_star=horizon.value,
        contraction_ratio=worst,
        C_a_used=horizon.C_a,
        M=M,
        eps=spec.eps,
        iterations=len(result.differences),
        residual=residual,
        max_norm=max(result.norms),
        T=u.t_max,
        truncated=not data.compact)
    return u, certificate
