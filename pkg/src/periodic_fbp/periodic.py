"""T-periodic positive states of the logistic problem on fixed domains.

The fixed-domain solver marches the same split scheme as the free boundary
solver from the constant upper solution and takes one snapshot per period;
the snapshots decrease to the maximal periodic solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import _kernels as K
from .coefficients import AsymptoticProfile, PeriodicCoefficient, RobinBC, require_same_period
from .eigen import NoConvergence, eigenvalue

log = logging.getLogger(__name__)


class Degenerate(RuntimeError):
    """The iteration collapsed to the zero state (no positive periodic solution)."""

    def __init__(self, msg, max_value):
        super().__init__(msg)
        self.max_value = max_value


class TailOutOfBand(RuntimeError):
    pass


class NoPositivePeriodic(ValueError):
    pass


class MonotonicityError(AssertionError):
    pass


@dataclass(frozen=True)
class PeriodicBVP:
    """v_t - d v_xx = a v - b v^2 on (0, ell), B[v](t,0) = 0, v(t,ell) = theta, periodic in t."""

    d: float
    a: PeriodicCoefficient
    b: PeriodicCoefficient
    bc: RobinBC
    ell: float
    theta: float = 0.0
    nx: int | None = None
    dx: float | None = None
    nt: int = 200

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError("ell must be positive")
        if self.theta < 0:
            raise ValueError("theta must be non-negative")
        require_same_period(self.a, self.b)

    @property
    def n_intervals(self) -> int:
        if self.nx is not None:
            return self.nx + 1
        dx = self.dx if self.dx is not None else 1.0 / 32
        return max(65, int(round(self.ell / dx)))

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.ell, self.n_intervals + 1)

    @property
    def upper_level(self) -> float:
        return max(self.theta, max(self.a.upper_bound, 0.0) / self.b.lower_bound)


@dataclass
class PeriodicState:
    values: np.ndarray        # (nt+1, N+1), rows t_k = k T / nt
    t: np.ndarray
    x: np.ndarray
    residual: float
    iterations: int
    max_history: list = field(default_factory=list, repr=False)

    def at_x(self, xq) -> np.ndarray:
        """Values at points xq (linear interpolation), one row per time sample."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        return np.stack([np.interp(xq, self.x, row) for row in self.values])

    def summary(self) -> dict:
        return {"residual": self.residual, "iterations": self.iterations}


class _FixedGrid:
    """Precomputed tables for the split logistic scheme on [0, ell]."""

    def __init__(self, d, a, b, bc, x, nt):
        self.T = a.T
        self.nt = nt
        self.dt = self.T / nt
        N = len(x) - 1
        dx = x[1] - x[0]
        self.x = x
        self.i0 = 1 if bc.is_dirichlet else 0
        tm = (np.arange(nt) + 0.5) * self.dt
        self.a_tab = a.table(tm, x)
        self.b_tab = b.table(tm, x)
        self.r = d * self.dt / dx**2
        ghost = 0.0 if bc.is_dirichlet else 2.0 * dx * bc.alpha / bc.beta
        lower, diag, upper = K.diffusion_matrix(N - self.i0, self.r, ghost, bc.is_dirichlet)
        self.lower = lower
        self.cp, self.piv = K.thomas_factor(lower, diag, upper)

    def period(self, w: np.ndarray, theta: float, record: np.ndarray) -> None:
        K.logistic_period(w, self.a_tab, self.b_tab, self.dt, self.lower, self.cp, self.piv,
                          self.i0, self.r, theta, record)


def solve_periodic_bvp(p: PeriodicBVP, tol_per: float = 1e-8, max_periods: int = 5000,
                       check_eigen: bool = True, collapse_level: float = 1e-6,
                       v0: np.ndarray | None = None) -> PeriodicState:
    """Positive T-periodic solution by monotone iteration from the constant upper solution.

    With ``v0`` the march starts there instead and the period snapshots are
    not required to decrease.
    """
    grid = _FixedGrid(p.d, p.a, p.b, p.bc, p.x, p.nt)
    lam = None
    if p.theta == 0.0 and check_eigen:
        lam = eigenvalue(p.d, p.a, p.ell, p.bc)
    if v0 is None:
        w = np.full(len(p.x), p.upper_level)
    else:
        w = np.array(v0, dtype=float)
        if w.shape != p.x.shape or np.any(w < 0):
            raise ValueError(f"v0 must be non-negative with {p.x.size} samples")
    w[-1] = p.theta
    if grid.i0 == 1:
        w[0] = 0.0
    record = np.empty((p.nt + 1, len(p.x)))
    maxima = [float(w.max())]
    for n in range(1, max_periods + 1):
        prev = w.copy()
        grid.period(w, p.theta, record)
        rise = float(np.max(w - prev))
        maxima.append(float(w.max()))
        if v0 is None and rise > 1e-12 * max(1.0, p.upper_level):
            raise MonotonicityError(f"period snapshots increased by {rise:.3g} at period {n}")
        change = float(np.max(np.abs(w - prev)))
        if p.theta == 0.0 and maxima[-1] < collapse_level and (lam is None or lam >= 0):
            raise Degenerate(f"iteration collapsed to zero (max {maxima[-1]:.3g}, lambda1 = {lam})",
                             maxima[-1])
        if change < tol_per:
            residual = float(np.max(np.abs(record[-1] - record[0])))
            state = PeriodicState(record.copy(), np.linspace(0.0, p.a.T, p.nt + 1), p.x, residual, n, maxima)
            if p.theta == 0.0 and maxima[-1] < collapse_level:
                raise Degenerate(f"converged to the zero state (max {maxima[-1]:.3g})", maxima[-1])
            return state
    raise NoConvergence(f"periodic iteration not settled after {max_periods} periods "
                        f"(last change {change:.3g})", residual=change)


@dataclass
class HalflineResult:
    state: PeriodicState
    L_final: float
    lengths: list
    differences: list
    tail_band_ok: bool | None
    band: tuple | None = None
    tail_range: tuple | None = None

    def summary(self) -> dict:
        return {"residual": self.state.residual, "iterations": self.state.iterations,
                "L_final": self.L_final, "tail_band_ok": self.tail_band_ok}


def solve_halfline_state(d: float, a: PeriodicCoefficient, b: PeriodicCoefficient, bc: RobinBC,
                         L_ladder: Sequence[float] | tuple = (8.0, 256.0), dx: float = 1.0 / 32,
                         nt: int = 200, tol_trunc: float = 1e-5, tol_per: float = 1e-12,
                         profile: AsymptoticProfile | None = None, slack: float = 0.2,
                         monotone_tol: float = 1e-10) -> HalflineResult:
    """Half-line periodic state U as the limit of (Dirichlet at L) states on L, 2L, 4L, ...

    ``L_ladder`` is either (L0, Lmax) or an explicit increasing list of
    lengths, each twice the previous so grid nodes are shared.
    """
    if len(L_ladder) == 2 and L_ladder[1] > 2 * L_ladder[0]:
        lengths = []
        L = float(L_ladder[0])
        while L <= L_ladder[1] * (1 + 1e-12):
            lengths.append(L)
            L *= 2.0
    else:
        lengths = [float(L) for L in L_ladder]
    if len(lengths) < 2:
        raise ValueError("need at least two ladder lengths")
    for L1, L2 in zip(lengths, lengths[1:]):
        if abs(L2 - 2 * L1) > 1e-9 * L2:
            raise ValueError("ladder lengths must double")
    n0 = int(round(lengths[0] / dx))
    if abs(n0 * dx - lengths[0]) > 1e-9 * lengths[0]:
        raise ValueError("the first length must be a multiple of dx")
    lam0 = eigenvalue(d, a, lengths[0], bc)
    if lam0 >= 0:
        raise Degenerate(f"lambda1(L0={lengths[0]:g}) = {lam0:.6g} >= 0; start the ladder longer", 0.0)

    prev = None
    diffs = []
    used = []
    for j, L in enumerate(lengths):
        n = n0 * 2**j
        st = solve_periodic_bvp(PeriodicBVP(d, a, b, bc, L, 0.0, nx=n - 1, nt=nt),
                                tol_per=tol_per, check_eigen=False)
        used.append(L)
        if prev is not None:
            m = len(prev.x)
            shared = st.values[:, :m]
            dip = float(np.max(prev.values - shared))
            if dip > monotone_tol:
                raise MonotonicityError(f"U_L decreased by {dip:.3g} when L doubled to {L:g}")
            half = (m - 1) // 2
            diff = float(np.max(np.abs(shared[:, :half + 1] - prev.values[:, :half + 1])))
            diffs.append(diff)
            log.debug("L=%g: sup |U_2L - U_L| on [0, L/2] = %.3g", L, diff)
            if diff < tol_trunc:
                prev = st
                break
        prev = st
    else:
        raise NoConvergence(f"truncation not converged up to L={lengths[-1]:g} "
                            f"(last difference {diffs[-1]:.3g})", residual=diffs[-1])

    result = HalflineResult(prev, used[-1], used, diffs, None)
    if profile is not None:
        L_cert = used[-2]
        mask = (prev.x >= L_cert / 4) & (prev.x <= L_cert / 2)
        xs = prev.x[mask]
        ratio = prev.values[:, mask] / xs[None, :] ** profile.rho
        lo, hi = profile.band()
        result.band = (lo, hi)
        result.tail_range = (float(ratio.min()), float(ratio.max()))
        ok = ratio.min() >= lo * (1 - slack) and ratio.max() <= hi * (1 + slack)
        result.tail_band_ok = bool(ok)
        if not ok:
            raise TailOutOfBand(f"U/x^rho spans [{ratio.min():.4g}, {ratio.max():.4g}] on the tail, "
                                f"outside [{lo:.4g}, {hi:.4g}] widened by {slack:.0%}")
    return result


@dataclass
class PeriodicODE:
    t: np.ndarray
    v: np.ndarray
    T: float

    def __call__(self, t):
        return np.interp(np.mod(np.asarray(t, dtype=float), self.T), self.t, self.v)

    @property
    def mean(self) -> float:
        return float(np.trapezoid(self.v, self.t) / self.T)


def _as_time_function(f, T) -> Callable:
    if isinstance(f, PeriodicCoefficient):
        return lambda t: f.eval(t, np.zeros_like(t))
    if callable(f):
        return f
    c = float(f)
    return lambda t: np.full(np.shape(t), c)


def ode_periodic_logistic(p, q, T: float | None = None, n: int = 4096) -> PeriodicODE:
    """Positive periodic solution of v' = p(t) v - q(t) v^2 through z = 1/v."""
    if T is None:
        T = next(c.T for c in (p, q) if isinstance(c, PeriodicCoefficient))
    pf, qf = _as_time_function(p, T), _as_time_function(q, T)
    t = np.linspace(0.0, T, n + 1)
    pv = np.asarray(pf(t), dtype=float) * np.ones_like(t)
    qv = np.asarray(qf(t), dtype=float) * np.ones_like(t)
    P = cumulative_trapezoid(pv, t, initial=0.0)
    if P[-1] <= 0:
        raise NoPositivePeriodic(f"mean growth {P[-1] / T:.6g} <= 0: only the zero solution is periodic")
    if np.any(qv <= 0):
        raise ValueError("q must be positive on [0, T]")
    eP = np.exp(P)
    Q = cumulative_trapezoid(qv * eP, t, initial=0.0)
    z0 = Q[-1] / (eP[-1] - 1.0)
    v = eP / (z0 + Q)
    return PeriodicODE(t, v, T)
