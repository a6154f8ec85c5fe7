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
Numerical experiments: time marching, blow-up detection, eps sweeps, scaling
fits and audits.

The marching scheme is the exact parallelogram identity of the 1D wave
operator on a characteristic lattice,

::

    u[k+1, i] = u[k, i+1] + u[k, i-1] - u[k-1, i] + h**2 * S[k, i]

with S = H(x, u) (plus an optional forcing) evaluated at the diamond center
(i, k).  The first two rows are seeded from the free solution: row 0 is
``eps * f`` and row 1 is ``eps * u0(x, h) + h**2 / 2 * S[0]``.

For compactly supported data without forcing the lattice grows with the
light cone and is exact up to quadrature error; otherwise it is fixed to
``[-cutoff, cutoff]`` with Dirichlet values at the two edge nodes.


Blow-up proxy
-------------
A run stops when the row maximum crosses a threshold (1e6 by default).  The
blow-up time is then extrapolated from the tail of the (t, max|u|) history
by :py:func:`extrapolate_blowup_time`, assuming
``max|u| ~ c (T - t) ** (-order / (p - 1))``.
"""
import collections
import concurrent.futures
import logging
import math

import numpy as np
from scipy.stats import linregress

from .blowup import (
    Region,
    iteration_constants,
    log_envelope,
    upper_lifespan_bound,
)
from .picard import GridFunction, measured_horizon
from .problem import phi
from .quadrature import free_solution_row, neighbor_sum, weight

logger = logging.getLogger(__name__)


DEFAULT_THRESHOLD = 1e6

# Blow-up rate order of the wave equation (u'' ~ u**p)
BLOWUP_ORDER = 2

# Extra zero nodes kept outside the light cone
CONE_PADDING = 2

# Minimum number of columns added when the lattice grows
GROW_CHUNK = 64

# Sweep budget, relative to the predicted upper bound
BUDGET_FACTOR = 3.0

# Largest sweep amplitude for a <= -1, where lifespans stay short
EPS_START_SHORT = 0.5

# Largest sweep amplitude otherwise; blow-up times around 50 and up
EPS_START_LONG = 0.01

# Relative tolerance of the sandwich check
SANDWICH_TOL = 0.2

# Minimum number of uncensored records in a fit
MIN_FIT_POINTS = 4


class HarnessError(Exception):
    """Base class for harness errors."""
    pass


class NumericalOverflow(HarnessError):
    """A marched row contains non-finite values."""

    def __init__(self, row, history=None):
        super(NumericalOverflow, self).__init__(
            "non-finite value in row %d" % (row, ))
        self.row = row
        self.history = history or []


class ExtrapolationError(HarnessError):
    """The blow-up history is unsuitable for extrapolation."""
    pass


class InsufficientData(HarnessError):
    """Too few usable records for a fit."""
    pass


class LatticeSolution(object):
    """
    Stored rows of a marched solution.

    :ivar h: lattice spacing
    :ivar x_min: position of the first column
    :ivar times: times of the stored rows
    :ivar rows: array (stored rows, nodes)
    :ivar history: list of (t, max|u|) for every marched row
    :ivar blowup_row: index of the row that crossed the threshold, or None
    """

    def __init__(self, h, x_min, times, rows, history, blowup_row=None,
                 threshold=None):
        self.h = h
        self.x_min = x_min
        self.times = np.asarray(times, dtype=float)
        self.rows = np.asarray(rows, dtype=float)
        self.history = history
        self.blowup_row = blowup_row
        self.threshold = threshold

    def __repr__(self):
        return '<{cls.__name__} h={obj.h!r} rows={n} t={t!r}>'.format(
            cls=type(self), obj=self, n=len(self.times), t=self.t_final)

    @property
    def xs(self):
        return self.x_min + np.arange(self.rows.shape[1]) * self.h

    @property
    def t_final(self):
        return self.history[-1][0] if self.history else 0.0

    def as_grid_function(self):
        """
        The solution as a :py:class:`wavelife.picard.GridFunction`.

        :raises ValueError: unless every row was stored
        """
        expected = np.arange(len(self.times)) * self.h
        if not np.allclose(self.times, expected, rtol=0, atol=1e-9 * self.h):
            raise ValueError("solution does not store every row")
        return GridFunction(self.h, self.x_min, self.rows)


def _cone_half_width(radius, t, h):
    return int(math.ceil((radius + t) / h - 1e-9)) + CONE_PADDING


def march(spec, h, T_max, threshold=DEFAULT_THRESHOLD, forcing=None,
          boundary=None, store_every=1):
    """
    March the lattice scheme from t = 0 to T_max or until blow-up.

    :type spec: wavelife.problem.ProblemSpec
    :param float h: lattice spacing
    :param float T_max: time budget (rounded down to a multiple of h)
    :param float threshold: row maximum that counts as blow-up
    :param forcing: optional extra source forcing(xs, t)
    :param boundary:
        optional edge values boundary(xs, t) on the fixed lattice (default
        eps times the free solution)
    :param store_every:
        store every n-th row, or None to store only the first and last rows

    :rtype: tuple
    :return: (solution, blowup_row), blowup_row is None without blow-up

    :raises NumericalOverflow: if a row contains non-finite values
    """
    logger.debug('march(%r, h=%r, T_max=%r, threshold=%r)',
                 spec, h, T_max, threshold)
    data = spec.data
    eps = spec.eps
    steps = int(math.floor(T_max / h + 1e-9))
    grows = data.compact and forcing is None and boundary is None
    if grows:
        half = _cone_half_width(data.support_radius, h, h)
    else:
        half = int(math.ceil(data.cutoff / h - 1e-9))

    def positions():
        return np.arange(-half, half + 1) * h

    def source(xs, u, t):
        value = spec.nonlinearity(u) * weight(spec.a, xs)
        if forcing is not None:
            value = value + forcing(xs, t)
        return value

    def edges(xs, t):
        edge_xs = xs[[0, -1]]
        if boundary is not None:
            return boundary(edge_xs, t)
        return eps * free_solution_row(data, edge_xs, t)

    xs = positions()
    prev = eps * free_solution_row(data, xs, 0.0)
    if boundary is not None:
        prev[[0, -1]] = edges(xs, 0.0)
    if not np.max(np.abs(prev)) < threshold:
        raise ValueError("threshold %r does not exceed the initial sup %r" %
                         (threshold, np.max(np.abs(prev))))
    history = [(0.0, float(np.max(np.abs(prev))))]
    stored = [(0, half, prev.copy())]
    blowup_row = None
    cur = None

    def keep(k, row):
        if store_every and k % store_every == 0:
            stored.append((k, half, row.copy()))

    with np.errstate(over='ignore', invalid='ignore'):
        if steps >= 1:
            cur = (eps * free_solution_row(data, xs, h) +
                   0.5 * h * h * source(xs, prev, 0.0))
            if not grows:
                cur[[0, -1]] = edges(xs, h)
            if not np.all(np.isfinite(cur)):
                raise NumericalOverflow(1, history)
            history.append((h, float(np.max(np.abs(cur)))))
            keep(1, cur)
            if history[-1][1] >= threshold:
                blowup_row = 1

        for k in range(1, steps):
            if blowup_row is not None:
                break
            if grows:
                need = _cone_half_width(data.support_radius, (k + 1) * h, h)
                if need > half:
                    grow = max(need - half, GROW_CHUNK)
                    prev = np.pad(prev, grow)
                    cur = np.pad(cur, grow)
                    half += grow
                    xs = positions()
            t = k * h
            nxt = neighbor_sum(cur) - prev + h * h * source(xs, cur, t)
            if not grows:
                nxt[[0, -1]] = edges(xs, t + h)
            if not np.all(np.isfinite(nxt)):
                raise NumericalOverflow(k + 1, history)
            row_max = float(np.max(np.abs(nxt)))
            history.append(((k + 1) * h, row_max))
            keep(k + 1, nxt)
            prev, cur = cur, nxt
            if row_max >= threshold:
                blowup_row = k + 1
            if (k + 1) % 1000 == 0:
                logger.debug('row %d: t=%r max|u|=%r', k + 1, (k + 1) * h,
                             row_max)

    last = len(history) - 1
    if cur is not None and stored[-1][0] != last:
        stored.append((last, half, cur.copy()))
    times = [k * h for k, _, _ in stored]
    rows = [np.pad(row, half - row_half) for _, row_half, row in stored]
    if blowup_row is not None:
        logger.info('blow-up threshold crossed at row %d (t=%r)',
                    blowup_row, blowup_row * h)
    else:
        logger.info('marched %d rows without blow-up', last)
    solution = LatticeSolution(h, -half * h, times, rows, history,
                               blowup_row=blowup_row, threshold=threshold)
    return solution, blowup_row


def extrapolate_blowup_time(history, p, order=1, n_levels=10,
                            level_ratio=4.0, min_points=5):
    """
    Extrapolate the blow-up time from a (t, max|u|) history.

    Crossing times of the levels ``top / level_ratio**n`` (n < n_levels,
    above the initial maximum) are interpolated, and
    ``w = level ** (-(p - 1) / order)`` is fitted linearly against them.
    The root of the fit is the extrapolated blow-up time.

    :param history: sequence of (t, max|u|) pairs
    :param float p: exponent of the nonlinearity
    :param int order: 1 for u' ~ u**p rates, 2 for u'' ~ u**p rates

    :raises ExtrapolationError:
        if the tail is not monotone or too few levels are crossed
    """
    if len(history) < 2:
        raise ExtrapolationError("history too short")
    ts = np.array([t for t, _ in history], dtype=float)
    ms = np.array([m for _, m in history], dtype=float)
    exponent = (p - 1.0) / order
    top = ms[-1]
    levels = [top / level_ratio ** n for n in range(n_levels)]
    levels = [level for level in levels if level > ms[0]]

    crossings = []
    first = len(ms) - 1
    for level in levels:
        below = np.nonzero(ms[:-1] < level)[0]
        if not len(below):
            continue
        i = below[-1]
        if ms[i] <= 0:
            continue
        w0, w1, wl = ms[i] ** -exponent, ms[i + 1] ** -exponent, \
            level ** -exponent
        crossings.append((ts[i] + (w0 - wl) / (w0 - w1) * (ts[i + 1] - ts[i]),
                          wl))
        first = min(first, i)

    if len(crossings) < min_points:
        raise ExtrapolationError("only %d level crossings (need %d)" %
                                 (len(crossings), min_points))
    if np.any(np.diff(ms[first:]) < 0):
        raise ExtrapolationError("history tail is not monotone")
    times, ws = zip(*crossings)
    fit = linregress(times, ws)
    if not fit.slope < 0:
        raise ExtrapolationError("fitted slope %r is not negative" %
                                 (fit.slope, ))
    root = -fit.intercept / fit.slope
    if root < 0:
        raise ExtrapolationError("negative blow-up time %r" % (root, ))
    return float(root)


BlowupRecord = collections.namedtuple(
    'BlowupRecord',
    ('eps', 'T_numeric', 'T_extrapolated', 'h', 'threshold', 'regime',
     'converged_flag', 'censored'))


def blowup_record(spec, h, threshold, row, history, order=BLOWUP_ORDER):
    """
    Summarize a marched blow-up run.

    :param row: the row that crossed the threshold, or None
    :param history: (t, max|u|) pairs of the run

    :rtype: BlowupRecord
    """
    def record(T_numeric, T_extrapolated, converged, censored):
        return BlowupRecord(eps=spec.eps, T_numeric=T_numeric,
                            T_extrapolated=T_extrapolated, h=h,
                            threshold=threshold, regime=spec.a,
                            converged_flag=converged, censored=censored)

    if row is None:
        t_final = history[-1][0]
        logger.warning('eps=%r: no blow-up before t=%r, run censored',
                       spec.eps, t_final)
        return record(t_final, t_final, False, True)

    T_numeric = row * h
    try:
        T_extrapolated = extrapolate_blowup_time(history, spec.p, order=order)
        converged = True
    except ExtrapolationError as e:
        logger.warning('eps=%r: extrapolation unreliable (%s), using the '
                       'threshold crossing time', spec.eps, e)
        T_extrapolated, converged = T_numeric, False
    logger.info('eps=%r: T_numeric=%r T_extrapolated=%r', spec.eps,
                T_numeric, T_extrapolated)
    return record(T_numeric, T_extrapolated, converged, False)


def run_blowup(spec, h, T_budget, threshold=DEFAULT_THRESHOLD,
               order=BLOWUP_ORDER):
    """
    March one blow-up run and summarize it.

    :rtype: BlowupRecord
    """
    try:
        solution, row = march(spec, h, T_budget, threshold=threshold,
                              store_every=None)
        history = solution.history
    except NumericalOverflow as e:
        logger.warning('eps=%r: overflow in row %d, treating it as blow-up',
                       spec.eps, e.row)
        row, history = e.row, e.history
    return blowup_record(spec, h, threshold, row, history, order)


def _run_task(task):
    return run_blowup(*task)


def sweep_budget(spec, factor=BUDGET_FACTOR):
    """Time budget of a sweep run, relative to the predicted upper bound."""
    return factor * upper_lifespan_bound(spec).value


def epsilon_sweep(template, eps_list, h, threshold=DEFAULT_THRESHOLD, jobs=1,
                  budget_factor=BUDGET_FACTOR, order=BLOWUP_ORDER):
    """
    Independent blow-up runs for a list of amplitudes.

    :type template: wavelife.problem.ProblemSpec
    :param eps_list: amplitudes
    :param int jobs: number of worker processes

    :rtype: list
    :return: :py:class:`BlowupRecord` objects sorted by eps
    """
    tasks = []
    for eps in sorted(float(e) for e in eps_list):
        spec = template.with_eps(eps)
        tasks.append((spec, h, sweep_budget(spec, budget_factor), threshold,
                      order))
    if not tasks:
        return []
    logger.info('sweeping %d amplitudes with %d job(s)', len(tasks), jobs)
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_task, tasks))
    else:
        records = [_run_task(task) for task in tasks]
    return sorted(records, key=lambda r: r.eps)


def geometric_eps(start, count, ratio=2 ** -0.5):
    """``count`` amplitudes ``start * ratio**n``."""
    return [start * ratio ** n for n in range(count)]


def default_eps_start(a):
    """
    Largest amplitude of a sweep in the regime of weight exponent ``a``.

    Blow-up times below a few dozen are still pre-asymptotic for a > -1, so
    those sweeps start lower.

    :rtype: float
    """
    if a <= -1:
        return EPS_START_SHORT
    return EPS_START_LONG


ScalingFit = collections.namedtuple(
    'ScalingFit',
    ('slope', 'intercept', 'r_squared', 'n_points', 'regime', 'stderr',
     'theory_slope'))

POWER_LAW = 'power-law'
PHI_LAW = 'phi-law'


def theory_slope(a, p):
    """
    The predicted exponent: ``-(p-1)/(1-a)`` for a < 0 and ``-(p-1)``
    otherwise (in phi-space for a = 0).
    """
    if a < 0:
        return -(p - 1) / (1 - a)
    return -(p - 1.0)


def fit_scaling(records, a, p):
    """
    Least squares fit of log T (log phi(T) for a = 0) against log eps.

    Censored records are never used.

    :rtype: ScalingFit
    :raises InsufficientData: with fewer than 4 usable records
    """
    usable = [r for r in records
              if not r.censored and r.T_extrapolated > 0 and
              math.isfinite(r.T_extrapolated)]
    if len(usable) < MIN_FIT_POINTS:
        raise InsufficientData("need %d uncensored records, got %d" %
                               (MIN_FIT_POINTS, len(usable)))
    x = np.log([r.eps for r in usable])
    T = np.array([r.T_extrapolated for r in usable])
    if a == 0:
        y, regime = np.log(phi(T)), PHI_LAW
    else:
        y, regime = np.log(T), POWER_LAW
    fit = linregress(x, y)
    result = ScalingFit(slope=float(fit.slope),
                        intercept=float(fit.intercept),
                        r_squared=float(min(1.0, fit.rvalue ** 2)),
                        n_points=len(usable),
                        regime=regime,
                        stderr=float(fit.stderr),
                        theory_slope=theory_slope(a, p))
    logger.info('fitted slope %r (theory %r, r2=%r)', result.slope,
                result.theory_slope, result.r_squared)
    return result


EnvelopeReport = collections.namedtuple(
    'EnvelopeReport',
    ('j', 'checked', 'skipped', 'inapplicable', 'violations', 'worst_margin',
     'note'))

SeedReport = collections.namedtuple(
    'SeedReport', ('checked', 'violations', 'worst_ratio', 'bound'))

SandwichEntry = collections.namedtuple(
    'SandwichEntry',
    ('eps', 'lower', 'T_extrapolated', 'upper', 'lower_ratio', 'passed',
     'excluded'))


def _node_mesh(solution):
    return np.meshgrid(solution.xs, solution.times)


def envelope_audit(solution, spec, consts, j_max, tol=None, threshold=None):
    """
    Check ``u >= envelope_j * (1 - tol)`` on every stored lattice node in the
    region of each envelope j <= j_max.

    Nodes where the envelope exceeds the blow-up threshold are counted as
    inapplicable, since the solution blew up before the envelope applies.

    :type solution: LatticeSolution
    :param tol: relative tolerance (default 10 * h)

    :rtype: list
    :return: one :py:class:`EnvelopeReport` per j
    """
    if tol is None:
        tol = 10 * solution.h
    if threshold is None:
        threshold = solution.threshold or DEFAULT_THRESHOLD
    X, T = _node_mesh(solution)
    reports = []
    for j in range(1, j_max + 1):
        inside = Region.for_regime(spec.a, j).contains(X, T)
        with np.errstate(over='ignore'):
            env = np.exp(log_envelope(consts, j, X[inside], T[inside]))
        u = solution.rows[inside]
        beyond = env > threshold
        lower = env[~beyond] * (1 - tol)
        margins = u[~beyond] - lower
        violations = int(np.sum(margins < 0))
        report = EnvelopeReport(
            j=j,
            checked=int(np.sum(~beyond)),
            skipped=int(np.sum(~inside)),
            inapplicable=int(np.sum(beyond)),
            violations=violations,
            worst_margin=float(np.min(margins)) if margins.size else None,
            note=("solution blew up before envelope applicable"
                  if np.any(beyond) else None))
        if violations:
            logger.warning('envelope %d violated at %d node(s)', j,
                           violations)
        reports.append(report)
    return reports


def seed_audit(solution, spec, c0=None, tol=None):
    """
    Check the linear lower bound ``u >= eps * c0 * (1 - tol)`` on Gamma1.

    :param tol: relative tolerance (default 5 * h)
    :rtype: SeedReport
    """
    if c0 is None:
        c0 = spec.data.c0
    if tol is None:
        tol = 5 * solution.h
    X, T = _node_mesh(solution)
    inside = Region(Region.GAMMA1, 1).contains(X, T)
    u = solution.rows[inside]
    bound = spec.eps * c0 * (1 - tol)
    return SeedReport(
        checked=int(u.size),
        violations=int(np.sum(u < bound)),
        worst_ratio=(float(np.min(u) / (spec.eps * c0)) if u.size
                     else None),
        bound=bound)


def sandwich_check(records, template, tol=SANDWICH_TOL, safety=2.0):
    """
    Check ``lower <= T_extrapolated <= upper * (1 + tol)`` per record.

    The lower end is the measured certified horizon, the upper end the
    predicted upper bound.  Censored records and records outside the small
    eps regime are excluded.

    :rtype: list
    :return: one :py:class:`SandwichEntry` per record
    """
    entries = []
    for record in records:
        spec = template.with_eps(record.eps)
        upper = upper_lifespan_bound(spec)
        if record.censored or not upper.small_eps:
            entries.append(SandwichEntry(
                eps=record.eps, lower=None,
                T_extrapolated=record.T_extrapolated, upper=upper.value,
                lower_ratio=None, passed=None, excluded=True))
            continue
        lower = measured_horizon(spec, safety=safety).value
        passed = lower <= record.T_extrapolated <= upper.value * (1 + tol)
        ratio = record.T_extrapolated / lower if lower > 0 else None
        logger.info('eps=%r: horizon %r <= T %r <= bound %r (T/horizon %r)',
                    record.eps, lower, record.T_extrapolated, upper.value,
                    ratio)
        entries.append(SandwichEntry(
            eps=record.eps, lower=lower,
            T_extrapolated=record.T_extrapolated, upper=upper.value,
            lower_ratio=ratio, passed=bool(passed), excluded=False))
    return entries


def refinement_shift(spec, h, T_budget, threshold=DEFAULT_THRESHOLD,
                     order=BLOWUP_ORDER):
    """Relative change of the extrapolated blow-up time under h -> h/2."""
    coarse = run_blowup(spec, h, T_budget, threshold, order)
    fine = run_blowup(spec, h / 2, T_budget, threshold, order)
    return abs(fine.T_extrapolated - coarse.T_extrapolated) / \
        coarse.T_extrapolated


def threshold_shift(spec, h, T_budget, thresholds=(1e4, 1e6),
                    order=BLOWUP_ORDER):
    """Relative change of the extrapolated blow-up time between thresholds."""
    low, high = (run_blowup(spec, h, T_budget, t, order) for t in thresholds)
    return abs(high.T_extrapolated - low.T_extrapolated) / \
        high.T_extrapolated


def manufactured_error(spec, exact, forcing, h, T):
    """
    Max error at the final row of a run with a manufactured solution.

    :param exact: exact(xs, t), also used as boundary values
    :param forcing: forcing(xs, t) that makes exact a solution
    """
    solution, _ = march(spec, h, T, threshold=math.inf, forcing=forcing,
                        boundary=exact, store_every=None)
    t = solution.times[-1]
    return float(np.max(np.abs(solution.rows[-1] - exact(solution.xs, t))))


def observed_order(hs, errors):
    """Convergence order, the slope of log error against log h."""
    return float(linregress(np.log(hs), np.log(errors)).slope)


def audit_constants(spec, c0=None):
    """
    Iteration constants for the audits of a blow-up run.

    :param c0: seed constant (default: computed from the data)
    """
    if c0 is None:
        c0 = spec.data.c0
    return iteration_constants(spec.p, spec.a, c0, spec.eps)
