import math

import numpy as np
import pytest

from oracles import semiwave_speed
from periodic_fbp.coefficients import AsymptoticProfile, RobinBC, build_family, constant, sinusoid
from periodic_fbp.fbp import SolveParams, simulate
from periodic_fbp.speed import (SemiWaveProblem, TooShort, empirical_speed, kbar, solve_semiwave,
                                speed_bounds)


@pytest.mark.parametrize("mu,d,p", [(0.5, 1.0, 1.0), (1.0, 1.0, 1.0), (4.0, 0.5, 2.0)])
def test_constant_coefficients_match_shooting(mu, d, p):
    res = solve_semiwave(SemiWaveProblem(d, p, 1.0, mu))
    assert res.kbar == pytest.approx(semiwave_speed(mu, d, p, 1.0), abs=1e-3)
    assert np.ptp(res.k0) < 1e-6


def test_large_mu_follows_oracle_not_the_limit():
    res = solve_semiwave(SemiWaveProblem(1.0, 1.0, 1.0, 1e3))
    assert res.kbar == pytest.approx(semiwave_speed(1e3), abs=1e-3)
    assert res.far_field_gap < 1e-3
    assert res.kbar < 0.9 * 2.0  # still well short of 2 sqrt(d pbar)


def test_monotone_in_mu():
    ks = [kbar(mu, 1.0, 1.0, 1.0) for mu in (0.25, 0.5, 1.0, 2.0)]
    assert all(k1 < k2 for k1, k2 in zip(ks, ks[1:]))


def test_iterates_respect_bound_and_profile_is_monotone():
    p = sinusoid(1.0, 0.6)
    res = solve_semiwave(SemiWaveProblem(1.0, p, 1.0, 2.0))
    cstar = 2.0 * math.sqrt(1.0)
    assert all(0 < k < cstar for k in res.kbar_history)
    wx = np.diff(res.w, axis=1) / np.diff(res.x)
    half = wx.shape[1] // 2
    assert wx[:, :half].min() > 0
    # next to x = L the exact ODE value meets the discrete profile; the
    # resulting layer has slope of the O(dt) consistency error
    assert wx.min() > -1e-3
    v = res.w[:, -1]
    assert np.max(np.abs(v - np.interp(np.linspace(0, 1, v.size), *_ode(p)))) < 1e-6
    assert res.far_field_gap < 1e-3


def _ode(p):
    from periodic_fbp.periodic import ode_periodic_logistic
    v = ode_periodic_logistic(p, 1.0, T=1.0)
    return v.t, v.v


def test_time_periodic_speed_between_frozen_extremes():
    k = kbar(1.0, 1.0, sinusoid(1.0, 0.5), 1.0)
    assert kbar(1.0, 1.0, 0.5, 1.0) < k < kbar(1.0, 1.0, 1.5, 1.0)


def test_bounds_disabled_for_decaying_power():
    a = build_family({"kind": "oscillating", "T": 1.0, "params": {"a0": 1.0, "rho": -0.5}})
    sb = speed_bounds(1.0, 1.0, AsymptoticProfile.from_pair(a, constant(1.0, role="b")))
    assert not sb.band_enabled and all(math.isnan(v) for v in sb.interval)


def test_rejects_nonpositive_mean():
    with pytest.raises(ValueError):
        SemiWaveProblem(1.0, lambda t: np.sin(2 * np.pi * t), 1.0, 1.0)


def _run(mu, t_end):
    return simulate(SolveParams(1.0, mu, 2.0, RobinBC.neumann(), constant(1.0), constant(1.0, role="b"),
                                t_end=t_end))


def test_empirical_slope_fixed_boundary_and_short_runs():
    assert empirical_speed(_run(0.0, 24.0)).slope == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(TooShort):
        empirical_speed(_run(1.0, 10.0))


def test_empirical_slope_close_to_semiwave_speed():
    e = empirical_speed(_run(1.0, 40.0))
    assert e.slope == pytest.approx(kbar(1.0, 1.0, 1.0, 1.0), rel=0.05)
