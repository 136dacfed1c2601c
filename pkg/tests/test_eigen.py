import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from periodic_fbp.coefficients import RobinBC, constant, sinusoid
from periodic_fbp.eigen import (EigenProblem, NoSignChange, PeriodMap, classify_d, eigenvalue,
                                find_hstar, lambda_infinity, power_iteration, principal_eigenvalue)


def robin_closed_form(d, a, ell, alpha, beta):
    # phi = sin(nu (ell - x)); alpha sin(nu ell) + beta nu cos(nu ell) = 0
    f = lambda nu: alpha * math.sin(nu * ell) + beta * nu * math.cos(nu * ell)
    nu = brentq(f, math.pi / (2 * ell) + 1e-12, math.pi / ell - 1e-12) if alpha and beta else (
        math.pi / ell if beta == 0 else math.pi / (2 * ell))
    return d * nu * nu - a


@pytest.mark.parametrize("alpha", [1.0, 0.0, 0.3, 0.8])
def test_robin_closed_form(alpha):
    lam = eigenvalue(0.7, constant(0.4), 2.0, RobinBC(alpha, 1 - alpha), nx=256)
    assert lam == pytest.approx(robin_closed_form(0.7, 0.4, 2.0, alpha, 1 - alpha), rel=1e-4)


def test_time_periodic_space_constant_uses_mean():
    # phi(t,x) = exp(-int a) ... separates: lambda1 = d pi^2/ell^2 - mean(a)
    lam = eigenvalue(1.0, sinusoid(0.3, 2.0), 3.0, RobinBC.dirichlet(), nx=256)
    assert lam == pytest.approx(math.pi**2 / 9 - 0.3, rel=1e-4)


def test_eigenfunction_positive_and_periodic():
    r = principal_eigenvalue(EigenProblem(1.0, sinusoid(1.0, 0.8), 2.0, RobinBC.neumann()))
    inner = r.phi[:, :-1]
    assert inner.min() > 0
    assert r.residual < 1e-6
    assert np.allclose(r.phi[:, -1], 0.0)


def test_power_iteration_matches_dense_eig():
    rng = np.random.default_rng(3)
    P = rng.random((30, 30)) + 0.01
    res = power_iteration(P, tol=1e-12)
    assert res.converged
    assert res.r == pytest.approx(max(abs(np.linalg.eigvals(P))), rel=1e-10)


def test_power_iteration_small_gap():
    # two nearly equal dominant eigenvalues: squaring still separates them
    P = np.diag([1.0, 0.9999, 0.5]) + 1e-6
    res = power_iteration(P, tol=1e-10, max_iter=500)
    assert res.converged
    assert res.r == pytest.approx(max(abs(np.linalg.eigvals(P))), rel=1e-8)


def test_long_domain_not_fooled_by_flat_start():
    lam = eigenvalue(1.0, constant(-1.0), 16.0, RobinBC.neumann())
    assert lam == pytest.approx(math.pi**2 / (4 * 256) + 1.0, rel=1e-6)


def test_period_map_is_nonnegative():
    pm = PeriodMap(EigenProblem(1.0, sinusoid(0.0, 3.0), 1.0, RobinBC(0.5, 0.5), nx=32))
    assert pm.matrix().min() >= 0.0


@settings(max_examples=8)
@given(st.floats(0.5, 4.0), st.floats(1.05, 2.0))
def test_strictly_decreasing_in_length(ell, factor):
    a = sinusoid(0.5, 1.0)
    lam1 = eigenvalue(1.0, a, ell, RobinBC.neumann(), nx=128)
    lam2 = eigenvalue(1.0, a, ell * factor, RobinBC.neumann(), nx=128)
    assert lam2 < lam1


@settings(max_examples=8)
@given(st.floats(0.01, 1.0))
def test_strictly_decreasing_in_a(shift):
    lam1 = eigenvalue(1.0, sinusoid(0.5, 1.0), 2.0, RobinBC.dirichlet(), nx=128)
    lam2 = eigenvalue(1.0, sinusoid(0.5 + shift, 1.0), 2.0, RobinBC.dirichlet(), nx=128)
    assert lam2 == pytest.approx(lam1 - shift, rel=1e-6)


def test_find_hstar_dirichlet():
    h = find_hstar(1.0, constant(1.0), RobinBC.dirichlet())
    assert h.hstar == pytest.approx(math.pi, rel=2e-4)
    assert abs(h.lambda_at) < 1e-3


def test_hopeless_growth_has_no_sign_change():
    with pytest.raises(NoSignChange) as info:
        find_hstar(1.0, constant(-1.0), RobinBC.neumann(), ell_max=8.0)
    assert info.value.ladder.last > 0


def test_ladder_is_monotone():
    lad = lambda_infinity(1.0, constant(0.5), RobinBC.dirichlet(), 16.0)
    assert lad.decreasing and lad.lengths == [1, 2, 4, 8, 16]
    assert lad.last == pytest.approx(math.pi**2 / 256 - 0.5, rel=1e-3)


def test_classify_d_sides():
    assert classify_d(2.0, constant(1.0), RobinBC.neumann(), 0.5).side == "minus"
    assert classify_d(2.0, constant(1.0), RobinBC.neumann(), 50.0).side == "plus"
    with pytest.raises(ValueError):
        classify_d(2.0, constant(1.0), RobinBC.neumann(), 0.0)
