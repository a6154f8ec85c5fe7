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
Problem specifications for the weighted semilinear wave equation.

This module describes one initial value problem

::

    u_tt - u_xx = F(u) / (1 + x**2) ** ((1 + a) / 2)
    u(x, 0) = eps * f(x),  u_t(x, 0) = eps * g(x)

through three immutable objects:

:py:class:`Nonlinearity`
    The function F, its exponent p and the Lipschitz constant A in
    ``|F'(s)| <= p * A * |s| ** (p - 1)``.

:py:class:`InitialData`
    The profiles f and g, with the norms the existence and blow-up
    arguments depend on (``sup_f``, ``l1_g``, ``c0``).

:py:class:`ProblemSpec`
    The weight exponent a, the amplitude eps, the nonlinearity, the data and
    the mode (blow-up or existence).


Data library
------------
Initial data can be selected by name with :py:func:`named_data`:

cos2-bump
    f = 0, g(y) = cos(pi * y / 2) ** 2 on [-1, 1].  The canonical blow-up
    datum, with c0 = 1/2 and M = 1.

gauss-pulse
    f = 0, g(y) = exp(-y ** 2).  Not compactly supported; lattices are
    truncated at :py:attr:`InitialData.cutoff`.

cos2-displacement
    f = 2 * cos2, g = cos2.  Existence mode only (f does not vanish).

Other names are looked up as CSV tables (see :py:func:`load_table`) in the
config directories of :py:mod:`wavelife.config`.


The scaling function
--------------------
:py:func:`phi` and :py:func:`phi_inverse` implement ``phi(s) = s log(2 + s)``,
the lifespan scale of the unweighted-critical case a = 0.
"""
import collections
import functools
import io
import logging
import math
import os
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.interpolate import CubicSpline
from scipy.special import erf

from . import config

logger = logging.getLogger(__name__)


# Relative tolerance for adaptive quadrature of data
QUAD_EPSREL = 1e-10
QUAD_EPSABS = 1e-14

# Number of samples used for sup norms and sign checks
SAMPLE_COUNT = 4001

# Number of samples for the custom nonlinearity contract check
CONTRACT_SAMPLES = 1000


class DomainError(ValueError):
    """Argument outside the domain of a function."""
    pass


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge."""
    pass


def adaptive_quad(func, lo, hi, points=None,
                  epsrel=QUAD_EPSREL, epsabs=QUAD_EPSABS, limit=200):
    """
    Integrate func over [lo, hi] with :py:func:`scipy.integrate.quad`.

    Non-convergence warnings from scipy are promoted to
    :py:class:`QuadratureError`.

    :param points: optional breakpoints inside (lo, hi)
    :rtype: float
    """
    if lo == hi:
        return 0.0
    kwargs = {'epsrel': epsrel, 'epsabs': epsabs, 'limit': limit}
    if points and np.isfinite(lo) and np.isfinite(hi):
        lower, upper = min(lo, hi), max(lo, hi)
        inside = sorted(set(x for x in points if lower < x < upper))
        if inside:
            kwargs['points'] = inside
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            value, _ = quad(func, lo, hi, **kwargs)
        except IntegrationWarning as e:
            raise QuadratureError(
                "quadrature on [%r, %r] did not converge: %s" % (lo, hi, e))
    return value


class Nonlinearity(object):
    """
    The nonlinear term F.

    Two built-in kinds are provided, ``F(u) = |u|**p`` and
    ``F(u) = |u|**(p-1) * u``.  A custom F must come with its derivative and
    a constant A such that ``|F'(s)| <= p * A * |s|**(p - 1)``.

    The exponent is not validated here, see :py:func:`validate_spec`.
    """

    ABS_POW = 'abs-pow'
    SIGNED_POW = 'signed-pow'
    CUSTOM = 'custom'

    KINDS = (ABS_POW, SIGNED_POW, CUSTOM)

    def __init__(self, kind, p, A=1.0, func=None, deriv=None):
        if kind not in self.KINDS:
            raise ValueError("invalid nonlinearity kind %r" % (kind, ))
        if kind == self.CUSTOM and (func is None or deriv is None):
            raise ValueError("custom nonlinearity needs F and F'")
        self.kind = kind
        self.p = float(p)
        self.A = float(A)
        self._func = func
        self._deriv = deriv

    def __repr__(self):
        return '<{cls.__name__} {obj.kind} p={obj.p!r} A={obj.A!r}>'.format(
            cls=type(self), obj=self)

    @classmethod
    def from_name(cls, name, p):
        if name not in (cls.ABS_POW, cls.SIGNED_POW):
            raise ValueError("unknown nonlinearity %r" % (name, ))
        return cls(name, p)

    @classmethod
    def custom(cls, func, deriv, p, A):
        """
        Create a custom nonlinearity after spot-checking its contract.

        F(0) = F'(0) = 0 is checked, and the bound on F' is checked on
        :py:const:`CONTRACT_SAMPLES` points in [-2, 2].

        :raises DomainError: if the contract is violated
        """
        nonlinearity = cls(cls.CUSTOM, p, A=A, func=func, deriv=deriv)
        if abs(nonlinearity(0.0)) > 1e-12 or \
                abs(nonlinearity.derivative(0.0)) > 1e-12:
            raise DomainError("custom F must satisfy F(0) = F'(0) = 0")
        s = np.linspace(-2.0, 2.0, CONTRACT_SAMPLES)
        bound = p * A * np.abs(s) ** (p - 1)
        actual = np.abs(nonlinearity.derivative(s))
        if np.any(actual > bound * (1 + 1e-9) + 1e-15):
            worst = s[np.argmax(actual - bound)]
            raise DomainError(
                "custom F' exceeds p*A*|s|**(p-1) at s=%r" % (worst, ))
        return nonlinearity

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == self.ABS_POW:
            value = np.abs(u) ** self.p
        elif self.kind == self.SIGNED_POW:
            value = np.abs(u) ** (self.p - 1) * u
        else:
            value = np.asarray(self._func(u), dtype=float)
        return float(value) if value.ndim == 0 else value

    def derivative(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == self.ABS_POW:
            value = self.p * np.abs(u) ** (self.p - 1) * np.sign(u)
        elif self.kind == self.SIGNED_POW:
            value = self.p * np.abs(u) ** (self.p - 1)
        else:
            value = np.asarray(self._deriv(u), dtype=float)
        return float(value) if value.ndim == 0 else value


#
# Profiles
#
# Profiles are small picklable callables, so that problem specs can be sent
# to worker processes.
#


class Zero(object):
    """The zero profile."""

    def __call__(self, y):
        value = np.zeros_like(np.asarray(y, dtype=float))
        return float(value) if value.ndim == 0 else value

    derivative = __call__
    primitive = __call__

    def __repr__(self):
        return 'Zero()'


class CosineBump(object):
    """
    ``amplitude * cos(pi * y / (2 * radius)) ** 2`` on [-radius, radius].

    The bump is C1 with vanishing value and derivative at the ends of its
    support.
    """

    def __init__(self, amplitude=1.0, radius=1.0):
        self.amplitude = float(amplitude)
        self.radius = float(radius)

    def __repr__(self):
        return 'CosineBump(amplitude={0!r}, radius={1!r})'.format(
            self.amplitude, self.radius)

    def _scalar(self, value):
        return float(value) if value.ndim == 0 else value

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) <= self.radius
        value = self.amplitude * np.cos(np.pi * y / (2 * self.radius)) ** 2
        return self._scalar(np.where(inside, value, 0.0))

    def derivative(self, y):
        y = np.asarray(y, dtype=float)
        inside = np.abs(y) <= self.radius
        value = (-self.amplitude * np.pi / (2 * self.radius) *
                 np.sin(np.pi * y / self.radius))
        return self._scalar(np.where(inside, value, 0.0))

    def primitive(self, y):
        """Antiderivative vanishing at 0, constant outside the support."""
        r = self.radius
        y = np.clip(np.asarray(y, dtype=float), -r, r)
        value = self.amplitude * (y / 2 + r * np.sin(np.pi * y / r) /
                                  (2 * np.pi))
        return self._scalar(value)


class Gaussian(object):
    """``amplitude * exp(-(y / width) ** 2)``"""

    def __init__(self, amplitude=1.0, width=1.0):
        self.amplitude = float(amplitude)
        self.width = float(width)

    def __repr__(self):
        return 'Gaussian(amplitude={0!r}, width={1!r})'.format(
            self.amplitude, self.width)

    def __call__(self, y):
        value = self.amplitude * np.exp(
            -(np.asarray(y, dtype=float) / self.width) ** 2)
        return float(value) if value.ndim == 0 else value

    def primitive(self, y):
        value = (self.amplitude * self.width * math.sqrt(math.pi) / 2 *
                 erf(np.asarray(y, dtype=float) / self.width))
        return float(value) if value.ndim == 0 else value


class TabulatedProfile(object):
    """
    Cubic spline through tabulated samples, zero outside the sample range.
    """

    def __init__(self, ys, values):
        self.ys = np.asarray(ys, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = CubicSpline(self.ys, self.values)
        self._anti = self._spline.antiderivative()

    def __repr__(self):
        return '<TabulatedProfile [%r, %r] n=%d>' % (
            self.ys[0], self.ys[-1], len(self.ys))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.ys[0]) & (y <= self.ys[-1])
        value = np.where(inside, self._spline(np.clip(y, self.ys[0],
                                                      self.ys[-1])), 0.0)
        return float(value) if value.ndim == 0 else value

    def primitive(self, y):
        y = np.clip(np.asarray(y, dtype=float), self.ys[0], self.ys[-1])
        value = self._anti(y)
        return float(value) if value.ndim == 0 else value


class InitialData(object):
    """
    Initial displacement f and velocity g, with cached norms.

    :param f: displacement profile (callable, vectorized)
    :param g: velocity profile (callable, vectorized)
    :param support_radius:
        radius R of a ball containing the supports of f and g, or None if the
        data is not compactly supported
    :param g_primitive:
        optional antiderivative of g, used for exact free solutions
    :param cutoff:
        truncation radius for data without compact support
    :param breakpoints:
        points where g is not smooth, passed on to quadrature
    """

    def __init__(self, f, g, support_radius=None, g_primitive=None,
                 name=None, cutoff=8.0, breakpoints=()):
        self.f = f
        self.g = g
        self.support_radius = (None if support_radius is None
                               else float(support_radius))
        self.g_primitive = g_primitive
        self.name = name
        self.cutoff = float(cutoff)
        self.breakpoints = tuple(breakpoints)

    def __repr__(self):
        return '<{cls.__name__} {name}>'.format(
            cls=type(self), name=self.name or 'anonymous')

    @property
    def compact(self):
        return self.support_radius is not None

    @property
    def window(self):
        """Interval where the data lives (or is truncated to)."""
        r = self.support_radius if self.compact else self.cutoff
        return (-r, r)

    def samples(self):
        return np.linspace(self.window[0], self.window[1], SAMPLE_COUNT)

    @property
    def f_vanishes(self):
        if isinstance(self.f, Zero):
            return True
        return not np.any(np.asarray(self.f(self.samples())) != 0)

    @functools.cached_property
    def sup_f(self):
        if isinstance(self.f, Zero):
            return 0.0
        return float(np.max(np.abs(self.f(self.samples()))))

    def _abs_g(self, y):
        return abs(self.g(y))

    @functools.cached_property
    def l1_g(self):
        if self.compact:
            lo, hi = self.window
            return adaptive_quad(self._abs_g, lo, hi, points=self.breakpoints)
        return adaptive_quad(self._abs_g, -np.inf, np.inf)

    @functools.cached_property
    def c0(self):
        """Half the mass of g on [-1, 1]."""
        return 0.5 * adaptive_quad(self.g, -1.0, 1.0, points=self.breakpoints)

    def tail_mass(self, radius):
        """L1 norm of g outside [-radius, radius]."""
        radius = max(float(radius), 0.0)
        if self.compact:
            r = self.support_radius
            if radius >= r:
                return 0.0
            return (adaptive_quad(self._abs_g, radius, r,
                                  points=self.breakpoints) +
                    adaptive_quad(self._abs_g, -r, -radius,
                                  points=self.breakpoints))
        return (adaptive_quad(self._abs_g, radius, np.inf) +
                adaptive_quad(self._abs_g, -np.inf, -radius))


class ProblemSpec(collections.namedtuple('ProblemSpec',
                                         ('a', 'eps', 'nonlinearity',
                                          'data', 'mode'))):
    """
    One initial value problem.

    :param float a: weight exponent, a >= -1
    :param float eps: data amplitude
    :param Nonlinearity nonlinearity: the F term
    :param InitialData data: the (f, g) pair
    :param str mode: :py:attr:`BLOWUP` or :py:attr:`EXISTENCE`
    """
    __slots__ = ()

    BLOWUP = 'blowup'
    EXISTENCE = 'existence'

    MODES = (BLOWUP, EXISTENCE)

    @property
    def p(self):
        return self.nonlinearity.p

    def with_eps(self, eps):
        return self._replace(eps=float(eps))


def validate_spec(spec):
    """
    Check a problem spec against the hypotheses of the lifespan theory.

    :type spec: ProblemSpec

    :rtype: list
    :return: descriptions of every violated invariant (empty if valid)
    """
    violations = []
    if not spec.p > 1:
        violations.append("p must exceed 1")
    if not spec.a >= -1:
        violations.append("a must be at least -1")
    if not spec.eps > 0:
        violations.append("eps must be positive")
    if spec.mode not in ProblemSpec.MODES:
        violations.append("mode must be one of %s" %
                          ', '.join(ProblemSpec.MODES))

    data = spec.data
    if not np.isfinite(data.sup_f):
        violations.append("sup_f must be finite")
    try:
        l1_g = data.l1_g
    except QuadratureError:
        logger.debug('l1 norm of g failed to converge', exc_info=True)
        l1_g = np.inf
    if not np.isfinite(l1_g):
        violations.append("l1_g must be finite")

    if spec.mode == ProblemSpec.BLOWUP:
        if not data.f_vanishes:
            violations.append("f must vanish identically")
        if np.min(data.g(data.samples())) < 0:
            violations.append("g must be nonnegative")
        elif not data.c0 > 0:
            violations.append("c0 must be positive")
    logger.debug('validate_spec(%r) -> %r', spec, violations)
    return violations


def builtin_blowup_data():
    """
    The canonical blow-up datum: f = 0, g = cos(pi y / 2)**2 on [-1, 1].

    :rtype: InitialData
    """
    bump = CosineBump()
    return InitialData(Zero(), bump, support_radius=1.0,
                       g_primitive=bump.primitive, name='cos2-bump')


def _gauss_pulse():
    pulse = Gaussian()
    return InitialData(Zero(), pulse, g_primitive=pulse.primitive,
                       name='gauss-pulse')


def _cos2_displacement():
    bump = CosineBump()
    return InitialData(CosineBump(amplitude=2.0), bump, support_radius=1.0,
                       g_primitive=bump.primitive, name='cos2-displacement')


DATA_LIBRARY = collections.OrderedDict((
    ('cos2-bump', builtin_blowup_data),
    ('gauss-pulse', _gauss_pulse),
    ('cos2-displacement', _cos2_displacement),
))


def load_table(filename):
    """
    Load tabulated initial data from a CSV file.

    The file must have a header line naming the columns ``y``, ``f`` and
    ``g`` (in any order).  Lines starting with ``#`` are ignored.  Values are
    interpolated with cubic splines and taken to be zero outside the
    tabulated range.

    :rtype: InitialData
    """
    logger.debug('load_table(%r)', filename)
    with io.open(filename, mode='rt', encoding='utf-8') as f:
        header = None
        for line in f:
            line = line.strip()
            if line and not line.startswith('#'):
                header = [c.strip() for c in line.split(',')]
                break
        if header is None or sorted(header) != ['f', 'g', 'y']:
            raise ValueError("%s: expected a 'y,f,g' header, got %r" %
                             (filename, header))
        table = np.loadtxt(f, delimiter=',', comments='#', ndmin=2)
    if table.shape[0] < 4:
        raise ValueError("%s: need at least 4 samples" % (filename, ))
    table = table[np.argsort(table[:, header.index('y')])]
    ys = table[:, header.index('y')]
    fs = table[:, header.index('f')]
    gs = table[:, header.index('g')]
    g = TabulatedProfile(ys, gs)
    f = Zero() if not np.any(fs) else TabulatedProfile(ys, fs)
    name = os.path.splitext(os.path.basename(filename))[0]
    return InitialData(f, g,
                       support_radius=max(abs(ys[0]), abs(ys[-1])),
                       g_primitive=g.primitive,
                       name=name,
                       breakpoints=tuple(ys))


def named_data(name):
    """
    Get initial data by library name, table name or CSV path.

    :raises LookupError: if nothing matches
    :rtype: InitialData
    """
    if name in DATA_LIBRARY:
        return DATA_LIBRARY[name]()
    if os.path.isfile(name):
        return load_table(name)
    filename = config.get_data_file(name)
    if filename:
        return load_table(filename)
    raise LookupError("unknown initial data %r" % (name, ))


def data_norms(data):
    """
    The norms of the data used by the existence and blow-up arguments.

    :type data: InitialData

    :rtype: tuple
    :return: (M, c0) with M = sup|f| + |g|_L1 and c0 = half the mass of g
             on [-1, 1]

    :raises QuadratureError: if the data is too rough to integrate
    """
    return data.sup_f + data.l1_g, data.c0


def phi(s):
    """
    ``phi(s) = s log(2 + s)`` for s >= 0.

    :raises DomainError: for negative s
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise DomainError("phi is defined for s >= 0, got %r" % (s, ))
    value = s_arr * np.log(2.0 + s_arr)
    return float(value) if value.ndim == 0 else value


def _phi_prime(s):
    return math.log(2.0 + s) + s / (2.0 + s)


def phi_inverse(y):
    """
    Inverse of :py:func:`phi`.

    Brackets the root in [0, max(1, y)] (doubling the upper end if needed),
    runs 60 bisection steps and polishes with at most 5 Newton steps.

    :raises DomainError: for negative y
    """
    y = float(y)
    if y < 0:
        raise DomainError("phi_inverse is defined for y >= 0, got %r" % (y, ))
    if y == 0:
        return 0.0
    lo, hi = 0.0, max(1.0, y)
    while phi(hi) < y:
        lo, hi = hi, 2 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if phi(mid) < y:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    for _ in range(5):
        residual = phi(s) - y
        if abs(residual) <= 1e-12 * max(1.0, y):
            break
        s = max(s - residual / _phi_prime(s), 0.0)
    return s
