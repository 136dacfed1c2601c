import math

import pytest

from periodic_fbp.coefficients import RobinBC, build_family, constant
from periodic_fbp.dichotomy import (BUDGET, EIGEN_NEGATIVE, FRONT_STALLED, NO_NEGATIVE_LENGTH, SPREADING,
                                    UNDECIDED, VANISHING, BracketFailure, classify, critical_mu,
                                    criteria_in_d)
from periodic_fbp.fbp import SolveParams

HSTAR = math.pi / 2


def params(h0, mu, **kw):
    base = dict(d=1.0, mu=mu, h0=h0, bc=RobinBC.neumann(), a=constant(1.0), b=constant(1.0, role="b"))
    base.update(kw)
    return SolveParams(**base)


def test_large_habitat_spreads_immediately():
    c = classify(params(math.pi, 1.0))
    assert (c.verdict, c.evidence, c.t_decided) == (SPREADING, EIGEN_NEGATIVE, 0.0)
    assert c.lambda_at_decision < 0
    assert c.hstar == pytest.approx(HSTAR, rel=1e-3)


def test_small_habitat_slow_front_vanishes():
    c = classify(params(0.3 * HSTAR, 1e-3))
    assert (c.verdict, c.evidence) == (VANISHING, FRONT_STALLED)
    assert c.h_final <= 1.01 * c.hstar and c.umax_final < 1e-6
    assert c.lambda_at_decision > 0


def test_fast_front_spreads_from_small_habitat():
    c = classify(params(0.5 * HSTAR, 10.0))
    assert c.verdict == SPREADING
    assert c.h_at_decision > 1.01 * c.hstar and c.lambda_at_decision < 0


def test_hopeless_growth_is_undecided_with_ladder():
    c = classify(params(1.0, 1.0, a=constant(-1.0)), ell_max=16.0)
    assert (c.verdict, c.evidence) == (UNDECIDED, NO_NEGATIVE_LENGTH)
    assert c.ladder["lengths"][-1] == 16.0 and min(c.ladder["lambda1"]) > 0


def test_tiny_budget_is_undecided():
    c = classify(params(0.5 * HSTAR, 0.8), budget=0.5)
    assert (c.verdict, c.evidence) == (UNDECIDED, BUDGET)
    assert c.t_decided is None


def test_all_mu_spread_sentinel():
    r = critical_mu(params(2.0, 1.0))
    assert r.all_spread and r.mu_lo is None and r.summary()["ratio"] is None


def test_bracket_failure_when_expansion_capped():
    with pytest.raises(BracketFailure):
        critical_mu(params(0.5 * HSTAR, 1.0), bracket=(50.0, 100.0), max_expand=1)


def test_larger_initial_density_spreads_at_the_threshold():
    base = critical_mu(params(0.5 * HSTAR, 1.0), tol_mu=0.05)
    assert base.mu_hi / base.mu_lo < 1.05 and not base.faults
    doubled = classify(params(0.5 * HSTAR, base.mu_hi, kappa=2.0))
    assert doubled.verdict == SPREADING


PATCH = {"kind": "patch", "T": 1.0,
         "params": {"m0": 1.0, "m1": 0.5, "s_plus": 3.0, "gamma": 0.5, "center": 2.0, "halfwidth": 0.5}}


def test_criteria_in_d_rows():
    p = params(3.0, 1.0, a=build_family(PATCH))
    rows = criteria_in_d(p, [0.01, 1000.0], mu_samples=[1.0], budget=50.0)
    small, large = rows
    assert small.side == "minus" and small.verdicts[1.0] == SPREADING and small.consistent
    assert large.side == "plus" and large.lambda1_h0 > 0


def test_criteria_in_d_eigen_only_and_workers():
    p = params(3.0, 1.0, a=build_family(PATCH))
    serial = criteria_in_d(p, [0.01, 0.1, 10.0])
    pooled = criteria_in_d(p, [0.01, 0.1, 10.0], workers=2)
    assert all(r.verdicts == {} for r in serial)
    assert [r.summary() for r in serial] == [r.summary() for r in pooled]
