"""Spreading/vanishing classification of trajectories and the sharp threshold in mu."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .eigen import HStar, NoSignChange, bracket_hstar, eigenvalue, find_hstar, lambda_infinity
from .fbp import FbpState, SolveParams, simulate

log = logging.getLogger(__name__)

SPREADING = "Spreading"
VANISHING = "Vanishing"
UNDECIDED = "Undecided"

EIGEN_NEGATIVE = "eigen-negative-at-current-front"
FRONT_STALLED = "front-stalled-and-density-decayed"
BUDGET = "budget-exhausted"
NO_NEGATIVE_LENGTH = "no probed length has lambda1<0"


class BracketFailure(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class Classification:
    verdict: str
    evidence: str
    t_decided: float | None = None
    h_at_decision: float | None = None
    lambda_at_decision: float | None = None
    hstar: float | None = None
    h_final: float | None = None
    umax_final: float | None = None
    ladder: dict | None = None
    trajectory: object = field(default=None, repr=False)

    @property
    def decided(self) -> bool:
        return self.verdict != UNDECIDED

    def summary(self) -> dict:
        return {"verdict": self.verdict, "evidence": self.evidence,
                "t_decided": self.t_decided, "h_at_decision": self.h_at_decision,
                "lambda_at_decision": self.lambda_at_decision, "hstar": self.hstar,
                "h_final": self.h_final, "umax_final": self.umax_final, "ladder": self.ladder}


def critical_length(params: SolveParams, ell_max: float | None = None, tol_len: float = 1e-4) -> HStar:
    """h* for (d, a, bc) of ``params``; raises NoSignChange if lambda1 > 0 up to ell_max."""
    ell_max = ell_max if ell_max is not None else max(256.0, 64.0 * params.h0)
    br = bracket_hstar(params.d, params.a, params.bc, ell_max=ell_max)
    return find_hstar(params.d, params.a, params.bc, bracket=br, tol_len=tol_len)


class _StopRules:
    def __init__(self, threshold: float, T: float, tol_front: float, tol_u: float):
        self.threshold = threshold
        self.T = T
        self.tol_front = tol_front
        self.tol_u = tol_u
        self.quiet_since = None

    def __call__(self, st: FbpState):
        if st.h > self.threshold:
            return SPREADING
        if st.hprime < self.tol_front and st.umax < self.tol_u:
            if self.quiet_since is None:
                self.quiet_since = st.t
            elif st.t - self.quiet_since >= self.T * (1 - 1e-12):
                return VANISHING
        else:
            self.quiet_since = None
        return None


def classify(params: SolveParams, budget: float | None = None, hstar: float | None = None,
             delta_frac: float = 1e-2, tol_front: float = 1e-6, tol_u: float = 1e-6,
             ell_max: float | None = None, keep_trajectory: bool = False) -> Classification:
    """Run to ``budget`` (default 200 T) with the spreading and vanishing stop rules.

    Spreading fires once h > h* (1 + delta_frac) and lambda1(h) < 0 is
    confirmed; vanishing needs h' and max u below their tolerances over one
    full period.
    """
    T = params.T
    budget = 200.0 * T if budget is None else float(budget)
    if hstar is None:
        try:
            hstar = critical_length(params, ell_max).hstar
        except NoSignChange as exc:
            lad = getattr(exc, "ladder", None)
            if lad is None:
                ell = ell_max if ell_max is not None else max(256.0, 64.0 * params.h0)
                lad = lambda_infinity(params.d, params.a, params.bc, ell)
            log.info("no sign change: %s", exc)
            return Classification(UNDECIDED, NO_NEGATIVE_LENGTH,
                                  ladder={"lengths": list(lad.lengths), "lambda1": list(lad.values)})
    threshold = hstar * (1.0 + delta_frac)
    rules = _StopRules(threshold, T, tol_front, tol_u)
    traj = simulate(params.replace(t_end=budget), stop=rules)
    f = traj.final
    out = Classification(UNDECIDED, BUDGET, hstar=hstar, h_final=f.h, umax_final=f.umax,
                         trajectory=traj if keep_trajectory else None)
    if traj.stop_reason == SPREADING:
        lam = eigenvalue(params.d, params.a, f.h, params.bc)
        out.lambda_at_decision = lam
        out.t_decided, out.h_at_decision = f.t, f.h
        if lam < 0:
            out.verdict, out.evidence = SPREADING, EIGEN_NEGATIVE
        else:
            log.warning("h=%.6g passed h*(1+delta) but lambda1=%.3g >= 0", f.h, lam)
    elif traj.stop_reason == VANISHING:
        out.verdict, out.evidence = VANISHING, FRONT_STALLED
        out.t_decided, out.h_at_decision = f.t, f.h
        out.lambda_at_decision = eigenvalue(params.d, params.a, f.h, params.bc)
    return out


@dataclass
class CriticalMu:
    mu_lo: float | None
    mu_hi: float | None
    hstar: float
    probes: list = field(default_factory=list)      # (mu, verdict, t_decided, h_final)
    faults: list = field(default_factory=list)
    all_spread: bool = False

    @property
    def ratio(self) -> float:
        return self.mu_hi / self.mu_lo if not self.all_spread else math.nan

    def summary(self) -> dict:
        return {"all_spread": self.all_spread, "mu_lo": self.mu_lo, "mu_hi": self.mu_hi,
                "ratio": None if self.all_spread else self.ratio, "hstar": self.hstar,
                "probes": [list(p) for p in self.probes], "faults": list(self.faults)}


def critical_mu(params: SolveParams, bracket: tuple = (0.1, 10.0), budget: float | None = None,
                tol_mu: float = 0.01, hstar: float | None = None, max_expand: int = 12,
                budget_growth: int = 2, **kw) -> CriticalMu:
    """Bracket mu* with classify(mu_lo) = Vanishing and classify(mu_hi) = Spreading.

    ``params.mu`` is ignored. An Undecided probe is retried with the budget
    doubled up to ``budget_growth`` times before BudgetExceeded is raised.
    """
    T = params.T
    budget = 200.0 * T if budget is None else float(budget)
    hs = hstar if hstar is not None else critical_length(params).hstar
    res = CriticalMu(None, None, hs)
    if params.h0 >= hs:
        res.all_spread = True
        return res

    def probe(mu):
        b = budget
        for _ in range(budget_growth + 1):
            c = classify(params.replace(mu=mu), budget=b, hstar=hs, **kw)
            if c.decided:
                break
            b *= 2.0
        res.probes.append((float(mu), c.verdict, c.t_decided, c.h_final))
        log.info("mu=%.6g -> %s", mu, c.verdict)
        if not c.decided:
            raise BudgetExceeded(f"mu={mu:.6g} undecided after t={b / 2:.6g}")
        for m, v, *_ in res.probes:
            if (v == VANISHING and c.verdict == SPREADING and m > mu) or \
               (v == SPREADING and c.verdict == VANISHING and m < mu):
                res.faults.append(f"verdicts not monotone in mu: {m:.6g} {v}, {mu:.6g} {c.verdict}")
        return c.verdict

    lo, hi = map(float, bracket)
    if not 0 < lo < hi:
        raise ValueError("bracket must satisfy 0 < lo < hi")
    hi_known = False
    for n in range(max_expand + 1):
        if probe(lo) == VANISHING:
            break
        hi, lo, hi_known = lo, lo / 2.0, True
    else:
        raise BracketFailure(f"still spreading at mu={hi:.3g} after {max_expand} halvings")
    if not hi_known:
        for n in range(max_expand + 1):
            if probe(hi) == SPREADING:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise BracketFailure(f"still vanishing at mu={lo:.3g} after {max_expand} doublings")
    while hi / lo >= 1.0 + tol_mu:
        mid = math.sqrt(lo * hi)
        if probe(mid) == SPREADING:
            hi = mid
        else:
            lo = mid
    res.mu_lo, res.mu_hi = lo, hi
    return res


@dataclass
class DRow:
    d: float
    lambda1_h0: float
    side: str
    verdicts: dict
    consistent: bool

    def summary(self) -> dict:
        return {"d": self.d, "lambda1_h0": self.lambda1_h0, "side": self.side,
                "verdicts": {repr(float(k)): v for k, v in self.verdicts.items()},
                "consistent": self.consistent}


def _d_row(args) -> DRow:
    params, d, mus, budget = args
    p = params.replace(d=d)
    lam = eigenvalue(d, p.a, p.h0, p.bc)
    verdicts = {}
    for mu in mus:
        verdicts[float(mu)] = classify(p.replace(mu=float(mu)), budget=budget).verdict
    side = "minus" if lam <= 0 else "plus"
    consistent = side == "plus" or all(v == SPREADING for v in verdicts.values())
    return DRow(float(d), lam, side, verdicts, consistent)


def criteria_in_d(params: SolveParams, d_grid: Sequence[float], mu_samples: Sequence[float] = (),
                  budget: float | None = None, workers: int = 1) -> list[DRow]:
    """Sign of lambda1(h0; d, a) per d and the observed verdicts at the sampled mu.

    A row with lambda1 <= 0 is consistent only if every sampled mu spreads.
    Rows are returned in d_grid order whatever the worker count.
    """
    tasks = [(params, float(d), tuple(mu_samples), budget) for d in d_grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_d_row, tasks))
    return [_d_row(t) for t in tasks]


def spreading_errors(params: SolveParams, U, periods: int, x_max: float = 5.0,
                     samples_per_period: int = 20) -> np.ndarray:
    """sup over one period and [0, x_max] of |u(t + nT, x) - U(t, x)| for n = 1..periods.

    ``U`` is a PeriodicState; u is sampled at monitor rows, U linearly
    interpolated in time.
    """
    T = params.T
    dt = params.step_size
    steps = int(round(T / dt))
    every = max(1, steps // samples_per_period)
    while steps % every:
        every -= 1
    xs = U.x[U.x <= x_max + 1e-12]
    Ux = U.values[:, : xs.size]
    errs = np.zeros(periods)

    def obs(st: FbpState):
        n = int(math.floor(st.t / T + 1e-9))
        tau = st.t - n * T
        if abs(tau) < 1e-9 * T and n > 0:
            n, tau = n - 1, T
        if n < 1 or n > periods:
            return
        row = np.array([np.interp(tau, U.t, Ux[:, j]) for j in range(xs.size)])
        errs[n - 1] = max(errs[n - 1], float(np.max(np.abs(st.u_at(xs) - row))))

    simulate(params.replace(t_end=(periods + 1) * T, monitor_every=every), observer=obs)
    return errs
