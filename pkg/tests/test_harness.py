import math

import numpy as np
import pytest

from wavelife.blowup import iteration_constants, upper_lifespan_bound
from wavelife.harness import (
    BlowupRecord,
    ExtrapolationError,
    InsufficientData,
    NumericalOverflow,
    PHI_LAW,
    POWER_LAW,
    audit_constants,
    envelope_audit,
    epsilon_sweep,
    extrapolate_blowup_time,
    fit_scaling,
    default_eps_start,
    geometric_eps,
    manufactured_error,
    march,
    observed_order,
    refinement_shift,
    run_blowup,
    sandwich_check,
    seed_audit,
    sweep_budget,
    theory_slope,
    threshold_shift,
)
from wavelife.problem import phi, phi_inverse
from wavelife.quadrature import free_solution_row


def _record(eps, T, censored=False, a=1.0):
    return BlowupRecord(eps=eps, T_numeric=T, T_extrapolated=T, h=0.01,
                        threshold=1e6, regime=a, converged_flag=True,
                        censored=censored)


def _history(T_star, p, order, t_last, n=400):
    ts = np.linspace(0.0, t_last, n)
    return [(t, (T_star - t) ** (-order / (p - 1.0))) for t in ts]


@pytest.mark.parametrize('h', (0.05, 0.01))
def test_homogeneous_exactness(linear_spec, h):
    solution, row = march(linear_spec, h, 3.0)
    assert row is None
    for t, u in zip(solution.times, solution.rows):
        exact = linear_spec.eps * free_solution_row(linear_spec.data,
                                                    solution.xs, t)
        assert np.max(np.abs(u - exact)) <= 1e-9


def test_lattice_grows_with_cone(linear_spec):
    solution, _ = march(linear_spec, 0.05, 3.0)
    assert solution.xs[0] <= -4.0
    assert solution.xs[-1] >= 4.0
    assert solution.xs[0] == pytest.approx(-solution.xs[-1])


def test_store_every(blowup_spec):
    solution, _ = march(blowup_spec, 0.05, 2.0, store_every=None)
    assert list(solution.times) == pytest.approx([0.0, 2.0])
    with pytest.raises(ValueError):
        solution.as_grid_function()


def test_as_grid_function(blowup_spec):
    solution, _ = march(blowup_spec, 0.1, 1.0)
    grid = solution.as_grid_function()
    assert grid.t_max == pytest.approx(1.0)
    assert np.array_equal(grid.rows, solution.rows)


@pytest.mark.parametrize('a', (-1.0, 0.0, 1.0))
def test_march_stays_nonnegative(make_spec, a):
    spec = make_spec(a=a, p=2.0, eps=0.5)
    solution, row = march(spec, 0.05, sweep_budget(spec))
    assert row is not None
    assert np.all(solution.rows >= 0)


def test_march_threshold_below_start(blowup_spec):
    with pytest.raises(ValueError):
        march(blowup_spec, 0.1, 1.0, threshold=0.0)


def test_march_overflow(blowup_spec):
    with pytest.raises(NumericalOverflow) as excinfo:
        march(blowup_spec, 0.05, 1000.0, threshold=math.inf,
              store_every=None)
    assert excinfo.value.row > 1
    assert len(excinfo.value.history) == excinfo.value.row


def test_manufactured_convergence(manufactured):
    hs = (0.04, 0.02, 0.01)
    errors = [manufactured_error(manufactured.spec, manufactured.exact,
                                 manufactured.forcing, h, 1.0)
              for h in hs]
    assert errors[0] > errors[1] > errors[2]
    assert 1.7 <= observed_order(hs, errors) <= 2.2


def test_observed_order():
    hs = np.array([0.1, 0.05, 0.025])
    assert observed_order(hs, 3 * hs ** 2) == pytest.approx(2.0)


@pytest.mark.parametrize('p,order', ((2.0, 1), (2.0, 2), (3.0, 2)))
def test_extrapolate_exact_rate(p, order):
    history = _history(2.0, p, order, 1.999)
    assert extrapolate_blowup_time(history, p, order=order) == \
        pytest.approx(2.0, abs=1e-6)


def test_extrapolate_not_monotone():
    history = _history(2.0, 2.0, 1, 1.999)
    t, m = history[-5]
    history[-5] = (t, 2 * history[-1][1])
    with pytest.raises(ExtrapolationError):
        extrapolate_blowup_time(history, 2.0)


def test_extrapolate_short_history():
    with pytest.raises(ExtrapolationError):
        extrapolate_blowup_time([(0.0, 1.0)], 2.0)
    with pytest.raises(ExtrapolationError):
        extrapolate_blowup_time([(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)], 2.0)


def test_run_blowup(blowup_spec):
    record = run_blowup(blowup_spec, 0.05, sweep_budget(blowup_spec))
    assert not record.censored
    assert record.converged_flag
    assert record.eps == blowup_spec.eps
    assert record.regime == blowup_spec.a
    assert abs(record.T_extrapolated - record.T_numeric) < \
        0.1 * record.T_numeric


def test_run_blowup_censored(blowup_spec):
    record = run_blowup(blowup_spec, 0.05, 1.0)
    assert record.censored
    assert not record.converged_flag
    assert record.T_numeric == pytest.approx(1.0)


def test_sweep_empty(blowup_spec):
    assert epsilon_sweep(blowup_spec, [], 0.05) == []


def test_sweep_monotone(blowup_spec):
    records = epsilon_sweep(blowup_spec, geometric_eps(0.5, 4, 0.5), 0.05)
    assert [r.eps for r in records] == sorted(r.eps for r in records)
    assert not any(r.censored for r in records)
    times = [r.T_extrapolated for r in records]
    assert times == sorted(times, reverse=True)


def test_sweep_jobs_independent(blowup_spec):
    eps_list = [0.5, 0.35]
    assert epsilon_sweep(blowup_spec, eps_list, 0.05, jobs=2) == \
        epsilon_sweep(blowup_spec, eps_list, 0.05, jobs=1)


def test_geometric_eps():
    assert geometric_eps(0.5, 3, 0.5) == [0.5, 0.25, 0.125]
    assert len(geometric_eps(0.5, 8)) == 8


@pytest.mark.parametrize('a,start', (
    (-1.0, 0.5),
    (-0.5, 0.01),
    (0.0, 0.01),
    (1.0, 0.01),
))
def test_default_eps_start(a, start):
    assert default_eps_start(a) == start


@pytest.mark.parametrize('a,p,slope', (
    (-1.0, 2.0, -0.5),
    (-0.5, 2.0, -2 / 3.),
    (0.0, 2.0, -1.0),
    (1.0, 3.0, -2.0),
))
def test_theory_slope(a, p, slope):
    assert theory_slope(a, p) == pytest.approx(slope)


def test_fit_exact_power_law():
    records = [_record(e, e ** -0.5, a=-1.0) for e in geometric_eps(0.5, 6)]
    fit = fit_scaling(records, -1.0, 2.0)
    assert fit.slope == pytest.approx(-0.5)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.regime == POWER_LAW
    assert fit.n_points == 6
    assert fit.theory_slope == pytest.approx(-0.5)


def test_fit_exact_phi_law():
    records = [_record(e, phi_inverse(1 / e), a=0.0)
               for e in geometric_eps(0.5, 6)]
    fit = fit_scaling(records, 0.0, 2.0)
    assert fit.regime == PHI_LAW
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)


def test_fit_skips_censored():
    records = [_record(e, 1 / e) for e in geometric_eps(0.5, 4)]
    records.append(_record(0.01, 5.0, censored=True))
    fit = fit_scaling(records, 1.0, 2.0)
    assert fit.n_points == 4
    assert fit.slope == pytest.approx(-1.0)


def test_fit_insufficient_data():
    records = [_record(e, 1 / e) for e in geometric_eps(0.5, 3)]
    records.append(_record(0.01, 5.0, censored=True))
    with pytest.raises(InsufficientData):
        fit_scaling(records, 1.0, 2.0)


def test_envelope_audit_bookkeeping(blowup_spec):
    solution, _ = march(blowup_spec, 0.1, 12.0)
    consts = audit_constants(blowup_spec)
    reports = envelope_audit(solution, blowup_spec, consts, 3)
    assert [r.j for r in reports] == [1, 2, 3]
    nodes = solution.rows.size
    for report in reports:
        assert report.checked + report.skipped + report.inapplicable == nodes
        assert report.checked > 0


def test_envelope_audit_inapplicable(blowup_spec):
    solution, _ = march(blowup_spec, 0.1, 12.0)
    consts = audit_constants(blowup_spec)._replace(log_C1=1000.0)
    report, = envelope_audit(solution, blowup_spec, consts, 1)
    assert report.inapplicable > 0
    assert report.note == "solution blew up before envelope applicable"


@pytest.mark.parametrize('a', (-1.0, 0.0, 1.0))
def test_envelope_audit(make_spec, a):
    spec = make_spec(a=a, p=2.0, eps=0.5)
    h = 0.05
    solution, row = march(spec, h, sweep_budget(spec))
    assert row is not None
    reports = envelope_audit(solution, spec, audit_constants(spec), 3)
    for report in reports:
        assert report.violations == 0


@pytest.mark.parametrize('a', (-1.0, 0.0, 1.0))
def test_seed_audit(make_spec, a):
    spec = make_spec(a=a, p=2.0, eps=0.5)
    solution, _ = march(spec, 0.05, 8.0, threshold=1e6)
    report = seed_audit(solution, spec)
    assert report.checked > 0
    assert report.violations == 0
    assert report.worst_ratio >= 1 - 5 * 0.05


def test_sandwich_synthetic(make_spec):
    template = make_spec(a=1.0, p=2.0)
    eps_small, eps_large = 0.02, 0.05
    upper = upper_lifespan_bound(template.with_eps(eps_small)).value
    records = [
        _record(eps_small, 0.5 * upper),
        _record(eps_large, 10 * upper),
        _record(0.01, 3.0, censored=True),
    ]
    entries = sandwich_check(records, template)
    assert [e.passed for e in entries] == [True, False, None]
    assert [e.excluded for e in entries] == [False, False, True]
    assert entries[0].lower > 0
    assert entries[0].lower_ratio > 1


def test_refinement_shift(blowup_spec):
    budget = sweep_budget(blowup_spec)
    assert refinement_shift(blowup_spec, 0.05, budget) < 0.05


def test_threshold_shift(blowup_spec):
    budget = sweep_budget(blowup_spec)
    assert threshold_shift(blowup_spec, 0.05, budget) < 0.02


def test_threshold_shift_by_order(blowup_spec):
    # w = max|u|**(-(p-1)/2) is linear in T* - t, w = max|u|**(-(p-1)) is not
    budget = sweep_budget(blowup_spec)
    linear = threshold_shift(blowup_spec, 0.05, budget, order=1)
    quadratic = threshold_shift(blowup_spec, 0.05, budget, order=2)
    assert quadratic < 0.02
    assert quadratic < linear


def test_audit_constants(blowup_spec):
    consts = audit_constants(blowup_spec)
    assert consts == iteration_constants(2.0, 1.0, blowup_spec.data.c0, 0.5)
    assert audit_constants(blowup_spec, c0=0.25).c0 == 0.25


@pytest.mark.slow
@pytest.mark.parametrize('a,h,slope,tol', (
    (-1.0, 0.02, -0.5, 0.075),
    (-0.5, 0.05, -2 / 3., 0.10),
    (0.0, 0.05, -1.0, 0.10),
    (1.0, 0.05, -1.0, 0.10),
))
def test_scaling_exponents(make_spec, a, h, slope, tol):
    template = make_spec(a=a, p=2.0)
    records = epsilon_sweep(template,
                            geometric_eps(default_eps_start(a), 8), h,
                            threshold=1e6, jobs=4)
    fit = fit_scaling(records, a, 2.0)
    assert abs(fit.slope - slope) <= tol
    for entry in sandwich_check(records, template):
        assert entry.excluded or entry.passed
