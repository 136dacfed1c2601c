"""Periodic semi-wave speed k0(mu, p, q)(t) and empirical front speeds."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .coefficients import AsymptoticProfile
from .eigen import NoConvergence
from .fbp import Trajectory
from .periodic import _as_time_function, ode_periodic_logistic

log = logging.getLogger(__name__)


class SupercriticalDrift(RuntimeError):
    pass


class TooShort(ValueError):
    pass


@dataclass(frozen=True)
class SemiWaveProblem:
    """w_t - d w_xx + k(t) w_x = p w - q w^2 on (0, L), w(t,0) = 0, w(t,L) = v(t)."""

    d: float
    p: object
    q: object
    mu: float
    T: float = 1.0
    L: float | None = None
    dx: float | None = None
    nt: int | None = None

    def __post_init__(self):
        if not self.d > 0 or not self.mu > 0:
            raise ValueError("d and mu must be positive")
        if self.p_mean <= 0:
            raise ValueError(f"mean of p must be positive, got {self.p_mean:.6g}")
        t = np.linspace(0.0, self.T, 513)
        if np.any(self._q(t) <= 0):
            raise ValueError("q must be positive on [0, T]")

    def _p(self, t):
        return np.asarray(_as_time_function(self.p, self.T)(t), dtype=float) * np.ones_like(t)

    def _q(self, t):
        return np.asarray(_as_time_function(self.q, self.T)(t), dtype=float) * np.ones_like(t)

    @property
    def p_mean(self) -> float:
        t = np.linspace(0.0, self.T, 2049)
        return float(np.trapezoid(self._p(t), t) / self.T)

    @property
    def q_mean(self) -> float:
        t = np.linspace(0.0, self.T, 2049)
        return float(np.trapezoid(self._q(t), t) / self.T)

    @property
    def time_dependent(self) -> bool:
        t = np.linspace(0.0, self.T, 257)
        return bool(np.ptp(self._p(t)) > 0 or np.ptp(self._q(t)) > 0)

    @property
    def critical_speed(self) -> float:
        return 2.0 * math.sqrt(self.d * self.p_mean)

    @property
    def length(self) -> float:
        return self.L if self.L is not None else 40.0 * math.sqrt(self.d / self.p_mean)

    @property
    def steps(self) -> int:
        if self.nt is not None:
            return self.nt
        return 400 if self.time_dependent else 20

    @property
    def n_intervals(self) -> int:
        dx = self.dx if self.dx is not None else 0.02 * math.sqrt(self.d / self.p_mean)
        return int(math.ceil(self.length / dx))


@dataclass
class SpeedResult:
    k0: np.ndarray            # on t_j = j T / nt, j = 0..nt-1
    t: np.ndarray
    kbar: float
    w: np.ndarray = field(repr=False)          # (nt+1, N+1) semi-wave profile over one period
    x: np.ndarray = field(repr=False)
    residual: float = math.nan
    iterations: int = 0
    kbar_history: list = field(default_factory=list, repr=False)
    far_field_gap: float = math.nan
    critical_speed: float = math.nan

    def summary(self) -> dict:
        return {"kbar": self.kbar, "residual": self.residual, "iterations": self.iterations,
                "far_field_gap": self.far_field_gap, "critical_speed": self.critical_speed}


class _Attractor:
    def __init__(self, prob: SemiWaveProblem):
        self.prob = prob
        self.nt = prob.steps
        self.T = prob.T
        self.dt = self.T / self.nt
        self.N = prob.n_intervals
        self.x = np.linspace(0.0, prob.length, self.N + 1)
        self.dx = self.x[1] - self.x[0]
        tm = (np.arange(self.nt) + 0.5) * self.dt
        self.p_tab = prob._p(tm)
        self.q_tab = prob._q(tm)
        if np.max(self.p_tab) * self.dt > 0.5:
            raise ValueError("time step too large for the linearly implicit reaction; raise nt")
        self.ode = ode_periodic_logistic(prob._p, prob._q, T=self.T)
        self.t_nodes = np.linspace(0.0, self.T, self.nt + 1)
        self.v_tab = self.ode(self.t_nodes)
        self.record = np.empty((self.nt + 1, self.N + 1))
        self.slope = np.empty(self.nt + 1)

    def initial(self) -> np.ndarray:
        w = self.v_tab[0] * (1.0 - np.exp(-self.x / math.sqrt(self.prob.d)))
        w[-1] = self.v_tab[0]
        return w

    def relax(self, w: np.ndarray, k_tab: np.ndarray, tol: float, max_periods: int) -> np.ndarray:
        for _ in range(max_periods):
            prev = w.copy()
            K.semiwave_period(w, self.p_tab, self.q_tab, k_tab, self.v_tab, self.dt, self.dx,
                              self.prob.d, self.record, self.slope)
            if np.max(np.abs(w - prev)) < tol:
                return self.slope[:-1].copy()
        raise NoConvergence(f"semi-wave profile not periodic after {max_periods} periods")


def solve_semiwave(prob: SemiWaveProblem, omega: float = 0.5, tol_k: float = 1e-6,
                   max_iter: int = 400, tol_attr: float = 1e-8, max_periods: int = 20000,
                   max_violations: int = 30, far_tol: float = 1e-3, max_extend: int = 3) -> SpeedResult:
    """Self-consistent drift k0 = mu * w^{k0}_x(t, 0) by damped fixed-point iteration.

    The damping is halved when successive corrections change sign and
    grown by 1.2 after monotone progress; an iterate whose mean reaches
    2 sqrt(d pbar) is rejected and retried with a smaller damping.
    Near the critical speed the tail decays slowly, so while
    |w(L/2) - v| > far_tol the domain is doubled (at most ``max_extend`` times).
    """
    res = _solve_fixed_L(prob, omega, tol_k, max_iter, tol_attr, max_periods, max_violations)
    for _ in range(max_extend):
        if res.far_field_gap <= far_tol:
            return res
        log.info("far-field gap %.3g at L=%g; doubling L", res.far_field_gap, prob.length)
        prob = dataclasses.replace(prob, L=2.0 * prob.length,
                                   dx=prob.length / prob.n_intervals)
        new = _solve_fixed_L(prob, omega, tol_k, max_iter, tol_attr, max_periods, max_violations)
        stalled = new.far_field_gap > 0.5 * res.far_field_gap
        res = new
        if stalled:
            # the gap is time-discretization error, not truncation
            break
    if res.far_field_gap > far_tol:
        log.warning("semi-wave far field not reached: |w(L/2) - v| = %.3g", res.far_field_gap)
    return res


def _solve_fixed_L(prob, omega, tol_k, max_iter, tol_attr, max_periods, max_violations) -> SpeedResult:
    att = _Attractor(prob)
    cstar = prob.critical_speed
    k = np.full(att.nt, min(prob.mu * prob.p_mean / prob.q_mean, math.sqrt(prob.d * prob.p_mean)))
    w = att.initial()
    history = [float(k.mean())]
    prev_step = None
    violations = 0
    residual = math.inf
    for it in range(1, max_iter + 1):
        slope = att.relax(w, k, tol_attr, max_periods)
        k_new = prob.mu * slope
        step = k_new - k
        residual = float(np.max(np.abs(step)))
        log.debug("semi-wave it %d: kbar=%.8f residual=%.3g omega=%.3g", it, k.mean(), residual, omega)
        if residual < tol_k:
            k = k_new
            history.append(float(k.mean()))
            break
        if prev_step is not None:
            if float(np.mean(step)) * float(np.mean(prev_step)) < 0:
                omega *= 0.5
            else:
                omega = min(1.0, omega * 1.2)
        while True:
            cand = k + omega * step
            if cand.mean() < cstar and cand.min() >= 0:
                break
            violations += 1
            omega *= 0.5
            if violations > max_violations:
                raise SupercriticalDrift(f"iterates keep crossing 2 sqrt(d pbar) = {cstar:.6g}; "
                                         "increase L or the grid resolution")
        k = cand
        prev_step = step
        history.append(float(k.mean()))
    else:
        raise NoConvergence(f"semi-wave speed not converged in {max_iter} iterations "
                            f"(residual {residual:.3g})", estimate=float(k.mean()), residual=residual)

    profile = att.record.copy()
    mid = att.N // 2
    gap = float(np.max(np.abs(profile[:, mid] - att.v_tab)))
    kbar = float(k.mean())
    return SpeedResult(k, att.t_nodes[:-1], kbar, profile, att.x, residual, it, history, gap, cstar)


def kbar(mu: float, d: float, p, q, T: float = 1.0, **kw) -> float:
    return solve_semiwave(SemiWaveProblem(d, p, q, mu, T, **kw)).kbar


@dataclass
class SpeedBounds:
    lower: SpeedResult | None
    upper: SpeedResult | None
    band_enabled: bool
    note: str = ""

    @property
    def interval(self) -> tuple:
        if not self.band_enabled:
            return (math.nan, math.nan)
        return (self.lower.kbar, self.upper.kbar)


def speed_bounds(mu: float, d: float, profile: AsymptoticProfile, **kw) -> SpeedBounds:
    """kbar(mu, a_inf, b_sup) and kbar(mu, a_sup, b_inf); only meaningful for rho = 0."""
    if profile.rho != 0.0:
        return SpeedBounds(None, None, False, "rho < 0: no speed characterization, band check disabled")
    T = profile.T
    lower = solve_semiwave(SemiWaveProblem(d, profile.a_inf, profile.b_sup, mu, T, **kw))
    upper = solve_semiwave(SemiWaveProblem(d, profile.a_sup, profile.b_inf, mu, T, **kw))
    return SpeedBounds(lower, upper, True)


@dataclass
class EmpiricalSpeed:
    slope: float
    intercept: float
    residual: float
    window: tuple


def empirical_speed(traj: Trajectory, window: float = 0.5, min_periods: float = 10.0) -> EmpiricalSpeed:
    """Least-squares slope of h(t) over the final ``window`` fraction of the run."""
    t, h = traj.t, traj.h
    if t.size < 3:
        raise TooShort("trajectory has fewer than three monitor rows")
    t0 = t[-1] - window * (t[-1] - t[0])
    mask = t >= t0
    T = traj.params.T
    if t[-1] - t0 < min_periods * T:
        raise TooShort(f"fit window spans {t[-1] - t0:.3g} < {min_periods:g} periods")
    A = np.vstack([t[mask], np.ones(mask.sum())]).T
    coef, *_ = np.linalg.lstsq(A, h[mask], rcond=None)
    fit = A @ coef
    rms = float(np.sqrt(np.mean((h[mask] - fit) ** 2)))
    return EmpiricalSpeed(float(coef[0]), float(coef[1]), rms, (float(t0), float(t[-1])))
