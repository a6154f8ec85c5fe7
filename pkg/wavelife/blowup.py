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
The blow-up ledger.

For data with f = 0 and g >= 0 the solution is bounded from below by a
sequence of envelopes

::

    u(x, t) >= C_j * base(x, t) ** a_j

where ``a_j = (p**j - 1) / (p - 1)`` and C_j follows the recursion
``C_(j+1) = C_j**p * E / F**j``.  The base depends on the weight regime:

==========  ===============================================  ==============
regime      base                                             region
==========  ===============================================  ==============
a < 0       ``(t - x) ** -(a + 1) * (t - x - 1) ** 2``       Gamma2
a = 0       ``(t - x - 1) * log(1 + x)``                     Gamma1
a > 0       ``t - x - l_j``                                  Sigma_j
==========  ===============================================  ==============

C_j is tracked as log C_j throughout, since it under- or overflows double
precision after a handful of steps.

The functionals K(t) (:py:func:`blowup_functional`) bound the growth rate of
log C_j along x = t/2 from below; where K(t) > 0 the envelopes diverge, which
bounds the lifespan from above (:py:func:`upper_lifespan_bound`).
"""
import collections
import logging
import math

import numpy as np

from .problem import DomainError, ProblemSpec, phi, phi_inverse

logger = logging.getLogger(__name__)


# Envelope value that counts as divergence in divergence_index()
DIVERGENCE_THRESHOLD = 1e100

# Cap on the envelope index in divergence_index()
MAX_INDEX = 10000

# Smallest t where the K functionals are valid
FLOOR_NONPOSITIVE = 4.0
FLOOR_POSITIVE = 20.0

LOG2 = math.log(2.0)


IterationConstants = collections.namedtuple(
    'IterationConstants', ('E', 'F', 'k', 'c0', 'log_C1', 'p', 'a', 'eps'))

IterationState = collections.namedtuple(
    'IterationState', ('j', 'a_j', 'S_j', 'log_C_j', 'l_j'))

LifespanBound = collections.namedtuple('LifespanBound',
                                       ('value', 'small_eps'))


def iteration_constants(p, a, c0, eps):
    """
    Constants E, F, k and log C_1 of the envelope recursion.

    :rtype: IterationConstants
    """
    if a < 0:
        E = (p - 1) ** 2 / (2.0 ** (a + 5) * p ** 2)
        k = 2.0 ** -(a + 4)
        F = p ** 2
    elif a == 0:
        E = (p - 1) ** 2 / (2.0 * p ** 2)
        k = 0.5
        F = p ** 2
    else:
        E = (p - 1) / (2.0 ** (a + 2) * p)
        k = 2.0 ** -(a + 2)
        F = 2.0 * p
    log_C1 = p * math.log(c0 * eps) + math.log(k)
    return IterationConstants(E=E, F=F, k=k, c0=c0, log_C1=log_C1,
                              p=p, a=a, eps=eps)


def l_index(j):
    """The shift l_j of the region Sigma_j (l_1 = 3, l_j = 5 - 2**(2-j))."""
    if j < 1:
        raise ValueError("index must be positive, got %r" % (j, ))
    if j == 1:
        return 3.0
    return 5.0 - 2.0 ** (2 - j)


def a_index(j, p):
    """The exponent ``a_j = (p**j - 1) / (p - 1)``."""
    return (p ** j - 1.0) / (p - 1.0)


def partial_S(j, p):
    """``S_j = sum(i / p**i for i in 1..j-1)``."""
    return math.fsum(i / _power(p, i) for i in range(1, j))


def limit_S(p):
    """``S = lim S_j = p / (p - 1)**2``."""
    return p / (p - 1.0) ** 2


def initial_state(consts):
    """The ledger entry j = 1."""
    return IterationState(j=1, a_j=1.0, S_j=0.0, log_C_j=consts.log_C1,
                          l_j=3.0)


def seq_next(state, consts, p):
    """
    Advance the ledger from j to j + 1.

    :type state: IterationState
    :type consts: IterationConstants
    :rtype: IterationState
    """
    j = state.j
    return IterationState(
        j=j + 1,
        a_j=p * state.a_j + 1.0,
        S_j=state.S_j + j / _power(p, j),
        log_C_j=(p * state.log_C_j + math.log(consts.E) -
                 j * math.log(consts.F)),
        l_j=state.l_j + 2.0 ** -(j - 1))


def _power(p, n):
    try:
        return p ** n
    except OverflowError:
        return math.inf


def seq_closed_form(j, consts, p):
    """
    log C_j from the closed form

    ::

        log C_j = p**(j-1) * (log C_1 - S_j log F + log E / (p-1))
                  - log E / (p-1)

    :rtype: float
    """
    if j < 1:
        raise ValueError("index must be positive, got %r" % (j, ))
    log_E = math.log(consts.E) / (p - 1)
    bracket = consts.log_C1 - partial_S(j, p) * math.log(consts.F) + log_E
    return _power(p, j - 1) * bracket - log_E


class Region(collections.namedtuple('Region', ('kind', 'j'))):
    """
    Membership domains of the envelopes, all in x >= 0.

    Gamma1
        t - x >= 1
    Gamma2
        x >= t - x >= 1
    Sigma_j
        t - x >= l_j
    """
    __slots__ = ()

    GAMMA1 = 'gamma1'
    GAMMA2 = 'gamma2'
    SIGMA = 'sigma'

    @classmethod
    def for_regime(cls, a, j=1):
        if a < 0:
            return cls(cls.GAMMA2, j)
        elif a == 0:
            return cls(cls.GAMMA1, j)
        return cls(cls.SIGMA, j)

    def contains(self, x, t):
        x = np.asarray(x, dtype=float)
        d = np.asarray(t, dtype=float) - x
        if self.kind == self.GAMMA1:
            inside = (x >= 0) & (d >= 1)
        elif self.kind == self.GAMMA2:
            inside = (x >= d) & (d >= 1)
        else:
            inside = (x >= 0) & (d >= l_index(self.j))
        return bool(inside) if inside.ndim == 0 else inside


def _log_base(a, j, x, t):
    """log of the envelope base, -inf where the base is not positive."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(t, dtype=float) - x
    with np.errstate(divide='ignore', invalid='ignore'):
        if a < 0:
            base = d ** -(a + 1.0) * (d - 1.0) ** 2
        elif a == 0:
            base = (d - 1.0) * np.log1p(x)
        else:
            base = d - l_index(j)
        return np.where(base > 0, np.log(np.where(base > 0, base, 1.0)),
                        -np.inf)


def log_envelope(consts, j, x, t):
    """
    log of the j-th envelope at points assumed to be in its region.

    :rtype: numpy.ndarray
    """
    p = consts.p
    with np.errstate(invalid='ignore'):
        return (seq_closed_form(j, consts, p) +
                a_index(j, p) * _log_base(consts.a, j, x, t))


def envelope(spec, consts, j, x, t):
    """
    The j-th lower bound for u at (x, t).

    :type spec: wavelife.problem.ProblemSpec
    :type consts: IterationConstants

    :return:
        the bound (0.0 where the base vanishes, inf on overflow), or None
        outside the regime's region
    """
    if j < 1:
        raise ValueError("index must be positive, got %r" % (j, ))
    if not Region.for_regime(spec.a, j).contains(x, t):
        return None
    value = float(log_envelope(consts, j, x, t))
    if value == -math.inf:
        return 0.0
    if value > 709.0:
        return math.inf
    return math.exp(value)


def _log_factor(p, a, c0, E):
    """log of the eps- and t-independent factor in K(t)."""
    S = limit_S(p)
    value = p * math.log(c0) + math.log(E) / (p - 1)
    if a < 0:
        return (value + (-(a + 4) + p * (a - 3) / (p - 1)) * LOG2 -
                2 * S * math.log(p))
    elif a == 0:
        return value + (-1 - 3 * p / (p - 1)) * LOG2 - 2 * S * math.log(p)
    return (value + (-(a + 2) - 2 * p / (p - 1)) * LOG2 -
            S * math.log(2 * p))


def _time_exponent(p, a):
    if a < 0:
        return p * (1 - a) / (p - 1)
    return p / (p - 1)


def regime_floor(a):
    """Smallest t where the K functional of the regime applies."""
    return FLOOR_NONPOSITIVE if a <= 0 else FLOOR_POSITIVE


def blowup_functional(a, consts, eps, t):
    """
    The divergence functional K(t) of the weight regime.

    K(t) > 0 certifies that the envelopes diverge at (t/2, t).

    :param float a: weight exponent
    :type consts: IterationConstants
    :param float eps: data amplitude
    :param float t: time, at least 4 (a <= 0) or 20 (a > 0)

    :raises DomainError: if t is below the regime floor
    """
    floor = regime_floor(a)
    if t < floor:
        raise DomainError("K functional needs t >= %r, got %r" % (floor, t))
    p = consts.p
    scale = phi(t) if a == 0 else t
    return (p * math.log(eps) + _log_factor(p, a, consts.c0, consts.E) +
            _time_exponent(p, a) * math.log(scale))


def threshold_constants(p, a, c0):
    """
    The constant B of the upper lifespan bound, and the largest eps for
    which the bound stays above the regime floor.

    :rtype: tuple
    :return: (B, eps_cap)
    """
    E = iteration_constants(p, a, c0, 1.0).E
    log_X = _log_factor(p, a, c0, E)
    if a < 0:
        B = math.exp(-log_X * (p - 1) / (p * (1 - a)))
        eps_cap = (B / FLOOR_NONPOSITIVE) ** ((1 - a) / (p - 1))
    elif a == 0:
        B = math.exp(-log_X * (p - 1) / p)
        eps_cap = (B / phi(FLOOR_NONPOSITIVE)) ** (1 / (p - 1))
    else:
        B = math.exp(-log_X * (p - 1) / p)
        eps_cap = (B / FLOOR_POSITIVE) ** (1 / (p - 1))
    return B, eps_cap


def upper_lifespan_bound(spec):
    """
    The predicted upper bound for the lifespan.

    ``B * eps**(-(p-1)/(1-a))`` for a < 0, ``phi_inverse(B * eps**(-(p-1)))``
    for a = 0 and ``B * eps**(-(p-1))`` for a > 0.

    :type spec: wavelife.problem.ProblemSpec
    :rtype: LifespanBound
    :return: the bound, flagged with whether eps is below eps_cap
    """
    if spec.mode != ProblemSpec.BLOWUP:
        logger.warning('upper lifespan bound requested for %r mode',
                       spec.mode)
    p, a, eps = spec.p, spec.a, spec.eps
    B, eps_cap = threshold_constants(p, a, spec.data.c0)
    if a < 0:
        value = B * eps ** (-(p - 1) / (1 - a))
    elif a == 0:
        value = phi_inverse(B * eps ** (-(p - 1)))
    else:
        value = B * eps ** (-(p - 1))
    small_eps = eps <= eps_cap
    if not small_eps:
        logger.info('eps=%r is outside the small eps regime (cap %r)',
                    eps, eps_cap)
    return LifespanBound(value, small_eps)


def envelope_growth_rate(spec, consts, x, t):
    """
    Asymptotic growth rate of log envelope_j(x, t) / p**(j-1).

    The envelopes at (x, t) diverge as j grows iff the rate is positive.

    :rtype: float
    """
    p, a = consts.p, consts.a
    d = t - x
    if a < 0:
        base = d ** -(a + 1) * (d - 1) ** 2 if d >= 1 else 0.0
    elif a == 0:
        base = (d - 1) * math.log1p(x) if x >= 0 else 0.0
    else:
        base = d - 5.0
    if not base > 0:
        return -math.inf
    return (consts.log_C1 - limit_S(p) * math.log(consts.F) +
            math.log(consts.E) / (p - 1) + p / (p - 1) * math.log(base))


def divergence_index(spec, consts, x, t, threshold=DIVERGENCE_THRESHOLD,
                     max_index=MAX_INDEX):
    """
    Smallest j whose envelope at (x, t) exceeds the threshold.

    :return:
        the index, or None if (x, t) is outside the region, the envelopes do
        not diverge there, or the cap is reached
    """
    if not Region.for_regime(spec.a, 1).contains(x, t):
        return None
    rate = envelope_growth_rate(spec, consts, x, t)
    if not rate > 0:
        logger.debug('envelopes at (%r, %r) decay (rate %r)', x, t, rate)
        return None
    p = consts.p
    log_threshold = math.log(threshold)
    log_E = math.log(consts.E) / (p - 1)
    log_F = math.log(consts.F)
    S_j = 0.0
    for j in range(1, max_index + 1):
        if j > 1:
            S_j += (j - 1) / _power(p, j - 1)
        if not Region.for_regime(spec.a, j).contains(x, t):
            continue
        log_base = float(_log_base(consts.a, j, x, t))
        bracket = (consts.log_C1 - S_j * log_F + log_E +
                   p / (p - 1) * log_base)
        if not bracket > 0:
            continue
        value = _power(p, j - 1) * bracket - log_E - log_base / (p - 1)
        if value > log_threshold:
            return j
    return None
