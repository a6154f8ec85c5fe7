import math

import numpy as np
import pytest
from scipy.integrate import dblquad

from wavelife.picard import GridFunction
from wavelife.problem import (
    CosineBump,
    DomainError,
    InitialData,
    Nonlinearity,
    Zero,
    named_data,
)
from wavelife.quadrature import (
    ConeTriangle,
    CoverageError,
    DampingProfile,
    damping_profile,
    duhamel_apply,
    duhamel_grid,
    free_solution,
    free_solution_row,
    mass_bound_constant,
    operator_constant,
    weight,
    weight_mass,
    weight_source,
)


def _one(xs, s):
    return 1.0


def _zero(xs, s):
    return 0.0


def _wavy(xs, s):
    return np.cos(xs) * (1 + s)


@pytest.mark.parametrize('x,t,expect', (
    (0.0, 2.0, 0.5),
    (10.0, 1.0, 0.0),
    (0.3, 0.0, 0.0),
))
def test_free_solution(bump_data, x, t, expect):
    assert free_solution(bump_data, x, t) == pytest.approx(expect, abs=1e-12)


def test_free_solution_displacement():
    data = named_data('cos2-displacement')
    assert free_solution(data, 0.25, 0.0) == pytest.approx(data.f(0.25))


def test_free_solution_negative_time(bump_data):
    with pytest.raises(DomainError):
        free_solution(bump_data, 0.0, -1.0)


def test_free_solution_row_matches_pointwise(bump_data):
    xs = np.linspace(-3, 3, 13)
    row = free_solution_row(bump_data, xs, 1.5)
    assert np.allclose(row, [free_solution(bump_data, x, 1.5) for x in xs])


def test_free_solution_quadrature_fallback():
    bump = CosineBump()
    exact = InitialData(Zero(), bump, support_radius=1.0,
                        g_primitive=bump.primitive)
    numeric = InitialData(Zero(), bump, support_radius=1.0)
    for x, t in ((0.0, 0.5), (0.7, 1.2), (-2.0, 1.5)):
        assert free_solution(numeric, x, t) == pytest.approx(
            free_solution(exact, x, t), abs=1e-10)


@pytest.mark.parametrize('kind,a,x,u,expect', (
    (Nonlinearity.ABS_POW, 1.0, 0.0, 3.0, 9.0),
    (Nonlinearity.ABS_POW, 1.0, 1.0, 1.0, 0.5),
    (Nonlinearity.SIGNED_POW, 1.0, 0.0, -3.0, -9.0),
))
def test_weight_source(make_spec, kind, a, x, u, expect):
    spec = make_spec(a=a, p=2.0, kind=kind)
    assert weight_source(spec, x, u) == pytest.approx(expect)


def test_weight_unit_at_minus_one():
    assert np.all(weight(-1.0, np.linspace(-5, 5, 11)) == 1.0)


def test_cone_triangle():
    cone = ConeTriangle(0.0, 2.0)
    assert cone.area == 4.0
    assert cone.contains(0.0, 0.0)
    assert cone.contains(1.0, 1.0)
    assert not cone.contains(1.5, 1.0)
    assert not cone.contains(0.0, 2.5)


def test_duhamel_zero(make_spec):
    spec = make_spec(a=1.0)
    assert duhamel_apply(spec, _zero, ConeTriangle(0.0, 1.0), 0.1) == 0.0


@pytest.mark.parametrize('h', (0.1, 0.05))
def test_duhamel_unit_weight(make_spec, h):
    spec = make_spec(a=-1.0)
    value = duhamel_apply(spec, _one, ConeTriangle(0.0, 2.0), h)
    assert value == pytest.approx(2.0, abs=10 * h * h)


def test_duhamel_matches_quadrature(make_spec):
    spec = make_spec(a=1.0)
    h = 1e-3
    expect, _ = dblquad(lambda y, s: 0.5 / (1 + y * y), 0.0, 1.0,
                        lambda s: -(1 - s), lambda s: 1 - s,
                        epsabs=1e-12, epsrel=1e-12)
    value = duhamel_apply(spec, _one, ConeTriangle(0.0, 1.0), h)
    assert value == pytest.approx(expect, abs=1e-6)


def test_duhamel_grid_matches_cone_sums(make_spec):
    spec = make_spec(a=0.5)
    h = 0.1
    V = GridFunction.from_function(_wavy, h, -2.0, 2.0, 1.5)
    L = duhamel_grid(V.rows * weight(spec.a, V.xs), h)
    for i, k in ((20, 15), (18, 9), (25, 3), (20, 1), (30, 0)):
        cone = ConeTriangle(V.xs[i], V.times[k])
        assert L[k, i] == pytest.approx(duhamel_apply(spec, V, cone, h),
                                        abs=1e-13)


def test_duhamel_coverage(make_spec):
    spec = make_spec(a=1.0)
    V = GridFunction.from_function(_wavy, 0.1, -1.0, 1.0, 1.0)
    with pytest.raises(CoverageError):
        duhamel_apply(spec, V, ConeTriangle(0.5, 1.0), 0.1)
    with pytest.raises(CoverageError):
        duhamel_apply(spec, V, ConeTriangle(0.0, 1.0), 0.2)
    with pytest.raises(CoverageError):
        duhamel_apply(spec, _one, ConeTriangle(0.0, 1.0), 0.3)


def test_weight_mass_unit_weight():
    # a = -1 makes the weight 1, so I is the cone area
    assert weight_mass(-1.0, 0.3, 2.0) == pytest.approx(4.0, rel=1e-8)


def test_weight_mass_riemann_sum():
    h = 1e-3
    total = 0.0
    for n in range(1000):
        # row s = (n + 1/2) h has 1999 - 2n cells
        m = 1999 - 2 * n
        y = (np.arange(m) - (m - 1) / 2.0) * h
        total += np.sum(1.0 / (1 + np.abs(y))) * h
    assert weight_mass(0.0, 0.0, 1.0) == pytest.approx(total * h, rel=2e-3)


def test_weight_mass_linear_growth():
    values = [weight_mass(1.0, 0.0, t) / t for t in (10.0, 20.0, 40.0)]
    assert all(v < 2.0 for v in values)
    assert values[0] < values[1] < values[2]


def test_weight_mass_negative_time():
    with pytest.raises(DomainError):
        weight_mass(0.0, 0.0, -1.0)


@pytest.mark.parametrize('a,tau,expect', (
    (-1.0, 3.0, 16.0),
    (0.0, 2.0, 2 * math.log(4)),
    (2.0, 9.0, 10.0),
))
def test_damping_profile(a, tau, expect):
    assert damping_profile(a, tau) == pytest.approx(expect)


def test_damping_profile_domain():
    with pytest.raises(DomainError):
        damping_profile(1.0, -0.5)


@pytest.mark.parametrize('a', (-1.0, -0.5, 0.0, 0.5, 2.0))
def test_damping_profile_inverse(a):
    profile = DampingProfile(a)
    assert profile.inverse(profile(7.0)) == pytest.approx(7.0)


def test_damping_profile_inverse_below_start():
    assert DampingProfile(1.0).inverse(0.5) is None


def test_mass_bound_constant_unit_weight():
    assert mass_bound_constant(-1.0, 4.0) == pytest.approx(0.64, rel=1e-6)


@pytest.mark.parametrize('a', (-1.0, -0.5, 0.0, 0.5, 2.0))
def test_mass_bound_holds_on_random_samples(a):
    T = 6.0
    constant = 2.0 * mass_bound_constant(a, T, resolution=16)
    rng = np.random.RandomState(4)
    scale = damping_profile(a, T)
    for x, t in zip(rng.uniform(-T - 1, T + 1, 200), rng.uniform(0, T, 200)):
        assert weight_mass(a, x, t) <= constant * scale


def test_operator_constant():
    assert operator_constant(-1.0, 4.0) == pytest.approx(0.32, rel=1e-6)


def test_free_solution_linear_in_data():
    f, g = CosineBump(amplitude=2.0), CosineBump(amplitude=3.0, radius=0.5)
    both = InitialData(f, g, support_radius=1.0, g_primitive=g.primitive)
    only_f = InitialData(CosineBump(), Zero(), support_radius=1.0)
    unit_g = CosineBump(radius=0.5)
    only_g = InitialData(Zero(), unit_g, support_radius=1.0,
                         g_primitive=unit_g.primitive)
    for x, t in ((0.0, 0.3), (0.4, 1.1), (-1.5, 2.0), (3.0, 0.5)):
        expect = (2.0 * free_solution(only_f, x, t) +
                  3.0 * free_solution(only_g, x, t))
        assert free_solution(both, x, t) == pytest.approx(expect, abs=1e-10)


@pytest.mark.parametrize('h', (0.1, 0.25))
def test_free_solution_diamond_identity(h):
    data = named_data('cos2-displacement')
    xs = np.linspace(-3, 3, 25)
    for t in (0.5, 1.0, 2.0):
        lhs = (free_solution_row(data, xs, t + h) +
               free_solution_row(data, xs, t - h))
        rhs = (free_solution_row(data, xs + h, t) +
               free_solution_row(data, xs - h, t))
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_duhamel_second_order(make_spec):
    spec = make_spec(a=1.0)
    expect, _ = dblquad(lambda y, s: 0.5 / (1 + y * y), 0.0, 1.0,
                        lambda s: -(1 - s), lambda s: 1 - s,
                        epsabs=1e-13, epsrel=1e-13)
    errors = [abs(duhamel_apply(spec, _one, ConeTriangle(0.0, 1.0), h) -
                  expect)
              for h in (0.1, 0.05, 0.025)]
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 <= coarse / fine <= 4.5


@pytest.mark.parametrize('a', (-0.5, 0.0, 1.0))
def test_weight_mass_even(a):
    for x, t in ((0.3, 2.0), (1.7, 0.9), (4.0, 6.0)):
        assert weight_mass(a, -x, t) == pytest.approx(weight_mass(a, x, t),
                                                      rel=1e-10)


@pytest.mark.parametrize('a', (-1.0, -0.5, 0.0, 0.5, 2.0))
def test_damping_profile_nondecreasing(a):
    values = [damping_profile(a, tau) for tau in np.linspace(0, 50, 201)]
    assert np.all(np.diff(values) >= 0)
