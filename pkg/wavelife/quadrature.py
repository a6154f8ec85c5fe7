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
Light-cone calculus for the 1D wave equation.

Free solution
    :py:func:`free_solution` evaluates the d'Alembert formula for the data
    (f, g), without the eps factor.

Duhamel operator
    ``L(V)(x, t)`` is half the integral of ``V * (1 + y**2) ** (-(1+a)/2)``
    over the backward cone ``D(x, t)``.  :py:func:`duhamel_apply` evaluates it
    at one apex with the midpoint rule on the characteristic diamonds tiling
    the cone; :py:func:`duhamel_grid` evaluates it at every node of a lattice
    at once, using the parallelogram recursion that the same diamond sums
    satisfy.

Weighted mass and damping profile
    :py:func:`weight_mass` is the integral of ``(1 + |y|) ** (-(1+a))`` over
    the cone, :py:func:`damping_profile` is the growth profile D(T) it is
    bounded by, and :py:func:`mass_bound_constant` measures the constant in
    that bound.

Lattice conventions
-------------------
Nodes sit at ``(x_min + i*h, k*h)``.  A node (i, k) with k >= 1 is the
center of the diamond with corners (i, k-1), (i, k+1), (i-1, k) and
(i+1, k), which has area ``2*h*h`` in the (y, s) plane.  Nodes on the row
k = 0 are the centers of half diamonds of area ``h*h``.  The cone with apex
(I, K) is tiled exactly by the full diamonds at rows 1..K-1 and the half
diamonds at row 0 whose centers have the parity of ``I + K - 1 - k``.
"""
import collections
import functools
import logging
import math

import numpy as np

from .problem import DomainError, adaptive_quad, phi, phi_inverse

logger = logging.getLogger(__name__)


# Relative tolerance for the weighted mass
MASS_EPSREL = 1e-8


class CoverageError(ValueError):
    """The lattice does not cover the requested cone."""
    pass


class ConeTriangle(collections.namedtuple('ConeTriangle',
                                          ('apex_x', 'apex_t'))):
    """The backward light cone D(x, t) of an apex (x, t)."""
    __slots__ = ()

    @property
    def area(self):
        return self.apex_t ** 2

    def contains(self, y, s):
        y = np.asarray(y, dtype=float)
        s = np.asarray(s, dtype=float)
        return ((s >= 0) & (s <= self.apex_t) &
                (np.abs(y - self.apex_x) <= self.apex_t - s))


class DampingProfile(collections.namedtuple('DampingProfile', ('a', ))):
    """
    The profile D(tau) of the weighted mass bound.

    ``(1 + tau) ** (1 - a)`` for a < 0, ``phi(tau)`` for a = 0 and
    ``1 + tau`` for a > 0.
    """
    __slots__ = ()

    def __call__(self, tau):
        if tau < 0:
            raise DomainError("damping profile needs tau >= 0, got %r" %
                              (tau, ))
        if self.a < 0:
            return (1.0 + tau) ** (1.0 - self.a)
        elif self.a == 0:
            return phi(tau)
        return 1.0 + tau

    def inverse(self, value):
        """
        The tau with D(tau) = value.

        :return: tau, or None if value is below D(0)
        """
        if value < self(0.0):
            return None
        if self.a < 0:
            return value ** (1.0 / (1.0 - self.a)) - 1.0
        elif self.a == 0:
            return phi_inverse(value)
        return value - 1.0


def damping_profile(a, tau):
    """
    Evaluate D(tau) for weight exponent a.

    :raises DomainError: for negative tau
    """
    return DampingProfile(a)(tau)


def weight(a, x):
    """The spatial weight ``(1 + x**2) ** (-(1 + a) / 2)``."""
    return (1.0 + np.square(x)) ** (-(1.0 + a) / 2.0)


def weight_source(spec, x, u):
    """
    The source term H(x, u) = F(u) * weight(a, x).

    :type spec: wavelife.problem.ProblemSpec
    """
    return spec.nonlinearity(u) * weight(spec.a, x)


def _g_integral(data, lo, hi):
    if data.g_primitive is not None:
        return data.g_primitive(hi) - data.g_primitive(lo)
    if data.compact:
        lo = max(lo, -data.support_radius)
        hi = min(hi, data.support_radius)
        if lo >= hi:
            return 0.0
    return adaptive_quad(data.g, lo, hi, points=data.breakpoints)


def free_solution(data, x, t):
    """
    The d'Alembert solution u0 for data (f, g), without the eps factor.

    :type data: wavelife.problem.InitialData
    :param float x: position
    :param float t: time, t >= 0

    :raises DomainError: for negative t
    :raises QuadratureError: if the integral of g does not converge
    """
    x, t = float(x), float(t)
    if t < 0:
        raise DomainError("free solution needs t >= 0, got %r" % (t, ))
    if t == 0:
        return float(data.f(x))
    return float(0.5 * (data.f(x + t) + data.f(x - t)) +
                 0.5 * _g_integral(data, x - t, x + t))


def free_solution_row(data, xs, t):
    """:py:func:`free_solution` at every x in xs."""
    xs = np.asarray(xs, dtype=float)
    if t == 0:
        return np.asarray(data.f(xs), dtype=float) * np.ones_like(xs)
    if data.g_primitive is not None:
        return (0.5 * (data.f(xs + t) + data.f(xs - t)) +
                0.5 * (data.g_primitive(xs + t) - data.g_primitive(xs - t)))
    return np.array([free_solution(data, x, t) for x in xs])


def _lattice_steps(t, h):
    steps = int(round(t / h))
    if abs(steps * h - t) > 1e-9 * max(h, t):
        raise CoverageError("h=%r does not divide t=%r" % (h, t))
    return steps


def _cone_values(V, cone, h, steps):
    """Values and positions of V on the lattice rows 0..steps-1 of a cone."""
    width = 2 * steps - 1
    if hasattr(V, 'rows'):
        if abs(V.h - h) > 1e-12 * h:
            raise CoverageError("lattice spacing %r differs from h=%r" %
                                (V.h, h))
        offset = (cone.apex_x - V.x_min) / h
        center = int(round(offset))
        if abs(center - offset) > 1e-9:
            raise CoverageError("apex x=%r is not a lattice node" %
                                (cone.apex_x, ))
        first = center - (steps - 1)
        if (first < 0 or first + width > V.rows.shape[1] or
                steps > V.rows.shape[0]):
            raise CoverageError("lattice does not cover the cone at %r" %
                                (cone, ))
        xs = V.x_min + np.arange(first, first + width) * h
        return V.rows[:steps, first:first + width], xs
    xs = cone.apex_x + np.arange(-(steps - 1), steps) * h
    values = np.array([np.broadcast_to(np.asarray(V(xs, k * h), dtype=float),
                                       xs.shape)
                       for k in range(steps)])
    return values, xs


def duhamel_apply(spec, V, cone, h):
    """
    Evaluate L(V) at the apex of a cone.

    The integrand ``V * weight`` is evaluated at diamond centers: full
    diamonds (measure 2h^2) on rows 1..K-1 and half diamonds (measure h^2) on
    row 0.  The result is half the weighted sum.

    :type spec: wavelife.problem.ProblemSpec
    :param V:
        a :py:class:`wavelife.picard.GridFunction`, or a callable V(y, s)
        vectorized in y
    :type cone: ConeTriangle
    :param float h: lattice spacing, must divide cone.apex_t

    :raises CoverageError: if the lattice does not cover the cone
    """
    steps = _lattice_steps(cone.apex_t, h)
    if steps == 0:
        return 0.0
    values, xs = _cone_values(V, cone, h, steps)
    w = values * weight(spec.a, xs)
    total = 0.5 * np.sum(w[0, 0::2])
    for k in range(1, steps):
        total += np.sum(w[k, k:2 * steps - 1 - k:2])
    return float(h * h * total)


def neighbor_sum(row):
    """Sum of the left and right neighbours of each node, zero outside."""
    out = np.zeros_like(row)
    out[1:] += row[:-1]
    out[:-1] += row[1:]
    return out


def duhamel_grid(weighted, h):
    """
    Evaluate L at every node of a lattice.

    Uses the recursion ``L[k+1] = L[k] shifted both ways - L[k-1] +
    h**2 * W[k]`` with ``L[0] = 0`` and ``L[1] = h**2 / 2 * W[0]``, which
    reproduces the diamond sums of :py:func:`duhamel_apply`.  Values beyond
    the lattice edges are taken to be zero.

    :param weighted: array (rows, nodes) of ``V * weight`` values
    :param float h: lattice spacing

    :rtype: numpy.ndarray
    """
    weighted = np.asarray(weighted, dtype=float)
    out = np.zeros_like(weighted)
    if weighted.shape[0] > 1:
        out[1] = 0.5 * h * h * weighted[0]
    for k in range(1, weighted.shape[0] - 1):
        out[k + 1] = neighbor_sum(out[k]) - out[k - 1] + h * h * weighted[k]
    return out


def _bracket_primitive(a, y):
    """Odd antiderivative of (1 + |y|) ** (-(1 + a))."""
    r = abs(y)
    if a < 0:
        value = ((1.0 + r) ** (-a) - 1.0) / (-a)
    elif a == 0:
        value = math.log1p(r)
    else:
        value = (1.0 - (1.0 + r) ** (-a)) / a
    return math.copysign(value, y)


def weight_mass(a, x, t):
    """
    The weighted mass I(x, t) of the cone D(x, t).

    The y-integral is done exactly, the s-integral by adaptive quadrature
    with breakpoints where the cone edges cross y = 0.

    :raises DomainError: for negative t
    """
    x, t = float(x), float(t)
    if t < 0:
        raise DomainError("weighted mass needs t >= 0, got %r" % (t, ))
    if t == 0:
        return 0.0

    def integrand(s):
        return (_bracket_primitive(a, x + t - s) -
                _bracket_primitive(a, x - t + s))

    return adaptive_quad(integrand, 0.0, t, points=(t + x, t - x),
                         epsrel=MASS_EPSREL)


@functools.lru_cache(maxsize=1024)
def mass_bound_constant(a, sample_T, resolution=24):
    """
    Measure the constant C in ``I(x, t) <= C * D(T)``.

    The supremum of ``I(x, t) / D(T)`` is taken over a ``resolution`` by
    ``resolution`` grid of 0 <= t <= T and 0 <= x <= T + 1 (I is even in x).
    The constant is empirical.

    :raises DomainError: unless sample_T > 0
    """
    if not sample_T > 0:
        raise DomainError("sample_T must be positive, got %r" % (sample_T, ))
    scale = damping_profile(a, sample_T)
    best = 0.0
    for t in np.linspace(0.0, sample_T, resolution):
        for x in np.linspace(0.0, sample_T + 1.0, resolution):
            best = max(best, weight_mass(a, x, t) / scale)
    logger.debug('mass_bound_constant(%r, %r) -> %r', a, sample_T, best)
    return best


def operator_constant(a, T, resolution=24):
    """
    Constant C such that ``|L(V)| <= C * D(T) * sup|V|`` on [0, T].

    Combines the measured mass bound with ``(1 + y**2) >= (1 + |y|)**2 / 2``
    and the factor 1/2 in L.
    """
    return (0.5 * 2.0 ** ((1.0 + a) / 2.0) *
            mass_bound_constant(a, T, resolution))
