import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodic_fbp.coefficients import AsymptoticProfile, RobinBC, build_family, constant, sinusoid
from periodic_fbp.periodic import (Degenerate, NoPositivePeriodic, PeriodicBVP, TailOutOfBand,
                                   ode_periodic_logistic, solve_halfline_state, solve_periodic_bvp)

B1 = constant(1.0, role="b")


def test_long_neumann_domain_is_near_capacity():
    st_ = solve_periodic_bvp(PeriodicBVP(1.0, constant(1.0), B1, RobinBC.neumann(), 10.0))
    assert st_.residual < 1e-7
    assert np.all(st_.values[:, st_.x <= 5.0] > 0.98)
    assert np.all(st_.values <= 1.0 + 1e-12)
    assert np.all(np.diff(st_.max_history) <= 1e-12)


def test_short_domain_degenerates():
    with pytest.raises(Degenerate):
        solve_periodic_bvp(PeriodicBVP(1.0, constant(1.0), B1, RobinBC.neumann(), 1.0))


def test_positive_boundary_value():
    st_ = solve_periodic_bvp(PeriodicBVP(1.0, constant(1.0), B1, RobinBC.dirichlet(), 1.0, theta=0.5))
    assert np.all(st_.values[:, -1] == 0.5) and np.all(st_.values[:, 0] == 0.0)
    assert st_.values[:, 1:-1].min() > 0


def test_different_starts_reach_same_state():
    p = PeriodicBVP(1.0, sinusoid(1.0, 0.8), B1, RobinBC(0.5, 0.5), 6.0)
    top = solve_periodic_bvp(p, tol_per=1e-11)
    small = 0.05 * np.sin(np.pi * p.x / p.ell) + 0.05
    low = solve_periodic_bvp(p, tol_per=1e-11, v0=small)
    assert np.max(np.abs(top.values - low.values)) < 1e-8


def test_time_only_growth_matches_logistic_ode():
    a = sinusoid(1.0, 0.5)
    res = solve_halfline_state(1.0, a, B1, RobinBC.neumann(), L_ladder=(4.0, 64.0))
    v = ode_periodic_logistic(a, B1)
    gap = np.max(np.abs(res.state.values[:, 0] - v(res.state.t)))
    assert gap < 1e-4
    assert res.differences[-1] < 1e-5
    assert all(d1 > d2 for d1, d2 in zip(res.differences, res.differences[1:]))


def test_tail_band_certificate():
    a = build_family({"kind": "oscillating", "T": 1.0,
                      "params": {"a0": 1.0, "a1": 0.3, "c": 0.2, "omega": 2 * math.pi}})
    prof = AsymptoticProfile.from_pair(a, B1)
    res = solve_halfline_state(1.0, a, B1, RobinBC.dirichlet(), L_ladder=(8.0, 128.0), profile=prof)
    assert res.tail_band_ok
    wrong = AsymptoticProfile(0.0, lambda t: 3 + 0 * t, lambda t: 4 + 0 * t,
                              lambda t: 1 + 0 * t, lambda t: 1 + 0 * t, 1.0)
    with pytest.raises(TailOutOfBand):
        solve_halfline_state(1.0, a, B1, RobinBC.dirichlet(), L_ladder=(8.0, 128.0), profile=wrong)


def test_ladder_needs_negative_start():
    with pytest.raises(Degenerate):
        solve_halfline_state(1.0, constant(1.0), B1, RobinBC.dirichlet(), L_ladder=(2.0, 64.0))


@settings(max_examples=20)
@given(st.floats(0.1, 3.0), st.floats(0.0, 1.0), st.floats(0.2, 4.0))
def test_ode_mean_equals_mean_growth(p0, frac, T):
    # mean(v'/v) = 0 over a period gives mean(v) = mean(p) when q = 1
    p = lambda t: p0 * (1 + frac * np.sin(2 * np.pi * t / T))
    v = ode_periodic_logistic(p, 1.0, T=T)
    assert v.mean == pytest.approx(p0, rel=1e-5)
    assert v(0.0) == pytest.approx(v(T), rel=1e-9)


def test_ode_constant_and_extinction():
    assert ode_periodic_logistic(2.0, 4.0, T=1.0)(0.3) == pytest.approx(0.5)
    with pytest.raises(NoPositivePeriodic):
        ode_periodic_logistic(lambda t: np.sin(2 * np.pi * t) - 0.1, 1.0, T=1.0)
