"""Front-fixing finite differences for the free boundary logistic problem.

With y = x / h(t) and w(t, y) = u(t, x) the moving habitat [0, h(t)] becomes
[0, 1] and the equation picks up a drift y h'/h w_y and a diffusivity d / h^2.
Each step: Stefan update of h (forward Euler, 3-point one-sided flux), exact
logistic reaction per node, explicit upwind drift, backward-Euler diffusion
with a Robin ghost node at y = 0 and w = 0 at y = 1.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .coefficients import PeriodicCoefficient, RobinBC, require_same_period

log = logging.getLogger(__name__)

MONITOR_COLUMNS = ("t", "h", "hprime", "umax", "mass", "residual")


class SolverError(RuntimeError):
    pass


class StabilityViolation(SolverError):
    pass


class FrontCollapse(SolverError):
    pass


class UnsupportedBC(ValueError):
    pass


def robin_profile(y: np.ndarray, h0: float, bc: RobinBC, kappa: float = 1.0) -> np.ndarray:
    """Compatible initial data kappa*sin(pi (x+s)/(h0+s)) on x = h0*y.

    s = 0 gives the Dirichlet sine, s = h0 the Neumann cosine; in between s
    solves alpha*u(0) = beta*u'(0).
    """
    if bc.is_dirichlet:
        s = 0.0
    elif bc.is_neumann:
        s = h0
    else:
        def mismatch(s):
            theta = math.pi * s / (h0 + s)
            return bc.alpha * math.sin(theta) - bc.beta * math.pi / (h0 + s) * math.cos(theta)
        # mismatch(0) < 0; at s = h0 it is alpha up to rounding in cos(pi/2)
        s = brentq(mismatch, 0.0, h0, xtol=1e-14) if mismatch(h0) > 0 else h0
    x = h0 * np.asarray(y, dtype=float)
    u = kappa * np.sin(math.pi * (x + s) / (h0 + s))
    u[-1] = 0.0
    return np.maximum(u, 0.0)


@dataclass(frozen=True)
class SolveParams:
    """Problem data and numerics for one trajectory.

    ``dt`` is the requested step; ``step_size`` is what the solver uses after
    the stability budget and rounding to T / integer.
    """

    d: float
    mu: float
    h0: float
    bc: RobinBC
    a: PeriodicCoefficient
    b: PeriodicCoefficient
    u0: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    ny: int = 256
    dt: Optional[float] = None
    t_end: float = 10.0
    monitor_every: int = 10
    kappa: float = 1.0
    tol_neg: float = 1e-12
    tol_front: float = 1e-10

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if not self.h0 > 0:
            raise ValueError(f"h0 must be positive, got {self.h0}")
        if self.ny < 8:
            raise ValueError("ny must be at least 8")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.monitor_every < 1:
            raise ValueError("monitor_every must be >= 1")
        require_same_period(self.a, self.b)
        if not self.b.lower_bound > 0 and not (self.a.upper_bound <= 0 and self.b.lower_bound >= 0):
            raise ValueError("b must be bounded below by a positive constant (b >= 0 is allowed when a <= 0)")
        u0 = self.initial_profile()
        if u0.shape != (self.ny + 2,):
            raise ValueError(f"u0 must have ny + 2 = {self.ny + 2} samples, got {u0.shape}")
        if np.any(u0 < 0) or u0[-1] != 0.0 or np.any(u0[1:-1] <= 0):
            raise ValueError("u0 must be >= 0, vanish at the front and be positive inside")
        dy = self.dy
        ux0 = (-3 * u0[0] + 4 * u0[1] - u0[2]) / (2 * dy * self.h0)
        if abs(self.bc.apply(u0[0], ux0)) > 1e-3 * u0.max() * (1.0 + 1.0 / self.h0):
            raise ValueError("u0 is not compatible with the boundary condition at x = 0")

    @property
    def T(self) -> float:
        return self.a.T

    @property
    def dy(self) -> float:
        return 1.0 / (self.ny + 1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.ny + 2)

    def initial_profile(self) -> np.ndarray:
        if self.u0 is not None:
            return np.asarray(self.u0, dtype=float)
        return robin_profile(self.y, self.h0, self.bc, self.kappa)

    @property
    def M(self) -> float:
        """Bound on u and h'/mu: max(||u0||, sup a / b1)."""
        growth = self.a.upper_bound / self.b.lower_bound if self.a.upper_bound > 0 else 0.0
        return max(float(self.initial_profile().max()), growth)

    def _u0_c1(self) -> float:
        u0 = self.initial_profile()
        return float(u0.max() + np.max(np.abs(np.diff(u0))) / (self.dy * self.h0))

    @property
    def front_speed_bound(self) -> float:
        """Barrier bound mu*Lambda on h'; Lambda = 2 M max(sqrt(sup a / 2d), 4 |u0|_C1 / 3M)."""
        M = self.M
        m0 = max(math.sqrt(max(self.a.upper_bound, 0.0) / (2.0 * self.d)), 4.0 * self._u0_c1() / (3.0 * M))
        return self.mu * 2.0 * M * m0

    @property
    def drift_speed(self) -> float:
        """Front speed used in the drift CFL budget: max(mu M, h'(0))."""
        u0 = self.initial_profile()
        hp0 = self.mu * (4.0 * u0[-2] - u0[-3]) / (2.0 * self.dy * self.h0)
        return max(self.mu * self.M, hp0)

    @property
    def step_size(self) -> float:
        T = self.T
        dt = self.dt if self.dt is not None else T / 200
        if self.a.sup_norm > 0:
            dt = min(dt, 0.5 / self.a.sup_norm)
        if self.mu > 0:
            # h >= h0; the march stops with StabilityViolation if h' ever
            # exceeds 2.5 times drift_speed
            dt = min(dt, 0.4 * self.dy * self.h0 / self.drift_speed)
        return T / math.ceil(T / dt - 1e-9)

    def replace(self, **changes) -> "SolveParams":
        return dataclasses.replace(self, **changes)

    def describe(self) -> dict:
        return {"d": self.d, "mu": self.mu, "h0": self.h0,
                "bc": {"alpha": self.bc.alpha, "beta": self.bc.beta},
                "a": self.a.descriptor(), "b": self.b.descriptor(),
                "ny": self.ny, "dt": self.step_size, "t_end": self.t_end,
                "monitor_every": self.monitor_every, "kappa": self.kappa}


@dataclass
class FbpState:
    t: float
    h: float
    hprime: float
    w: np.ndarray
    mass: float = math.nan
    reaction_integral: float = 0.0
    residual: float = math.nan

    @property
    def umax(self) -> float:
        return float(self.w.max())

    def u_at(self, x: np.ndarray) -> np.ndarray:
        """u(t, x) by linear interpolation; zero beyond the front."""
        y = np.linspace(0.0, 1.0, self.w.size)
        return np.interp(np.asarray(x, dtype=float) / self.h, y, self.w, right=0.0)

    def copy(self) -> "FbpState":
        return dataclasses.replace(self, w=self.w.copy())


def _mass(w: np.ndarray, h: float) -> float:
    return float(h * np.trapezoid(w, dx=1.0 / (w.size - 1)))


def _front_speed(w: np.ndarray, h: float, mu: float) -> float:
    dy = 1.0 / (w.size - 1)
    return mu * (4.0 * w[-2] - w[-3]) / (2.0 * dy * h)


def initial_state(params: SolveParams) -> FbpState:
    w = params.initial_profile().copy()
    st = FbpState(0.0, params.h0, _front_speed(w, params.h0, params.mu), w, _mass(w, params.h0))
    st.residual = _identity_defect(st, st, params)
    return st


def _identity_defect(state: FbpState, start: FbpState, params: SolveParams) -> float:
    if not params.bc.is_neumann or params.mu == 0:
        return math.nan
    k = params.d / params.mu
    return (state.mass + k * state.h) - (start.mass + k * start.h) - state.reaction_integral


def _advance(state: FbpState, params: SolveParams, nsteps: int, dt: float) -> FbpState:
    w = state.w.copy()
    cap = 2.0 * params.M
    h, t, hp, integral, wmin, status = K.fbp_march(
        w, state.h, state.t, nsteps, dt, params.d, params.mu, params.bc.alpha, params.bc.beta,
        params.a.kernel_id, params.a.params, params.b.kernel_id, params.b.params,
        cap, params.tol_neg, params.tol_front)
    if status == K.NEGATIVE:
        raise StabilityViolation(f"negative density {wmin:.3g} at t={t:.6g}")
    if status == K.OVERSHOOT:
        raise StabilityViolation(f"density above 2M={cap:.6g} at t={t:.6g}")
    if status == K.CFL:
        raise StabilityViolation(f"front speed {hp:.3g} breaks the drift CFL at t={t:.6g}; lower dt")
    if status == K.FRONT_COLLAPSE:
        raise FrontCollapse(f"front speed {hp:.3g} < 0 at t={t:.6g}")
    return FbpState(t, h, hp, w, _mass(w, h), state.reaction_integral + integral)


def step(state: FbpState, params: SolveParams) -> FbpState:
    """One time step of size params.step_size."""
    new = _advance(state, params, 1, params.step_size)
    new.residual = math.nan
    return new


StopRule = Callable[[FbpState], Optional[str]]


@dataclass
class Trajectory:
    params: SolveParams
    dt: float
    rows: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    final: Optional[FbpState] = None
    stop_reason: Optional[str] = None

    def column(self, name: str) -> np.ndarray:
        j = MONITOR_COLUMNS.index(name)
        return np.array([r[j] for r in self.rows])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    @property
    def h(self) -> np.ndarray:
        return self.column("h")

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(MONITOR_COLUMNS)
        for r in self.rows:
            wr.writerow([repr(float(v)) for v in r])
        return buf.getvalue()

    def summary(self) -> dict:
        f = self.final
        return {"t_final": f.t, "h_final": f.h, "hprime_final": f.hprime,
                "umax_final": f.umax, "classification": None,
                "stop_reason": self.stop_reason}


def simulate(params: SolveParams, stop: Optional[StopRule] = None,
             observer: Optional[Callable[[FbpState], None]] = None,
             keep_profiles: bool = False) -> Trajectory:
    """March to params.t_end or until ``stop`` returns a reason.

    ``stop`` and ``observer`` see the state at every monitor row.
    """
    dt = params.step_size
    n_total = int(round(params.t_end / dt))
    start = initial_state(params)
    traj = Trajectory(params, dt)

    def record(st: FbpState):
        traj.rows.append((st.t, st.h, st.hprime, st.umax, st.mass, st.residual))
        if keep_profiles:
            traj.profiles.append((st.t, st.h, st.w.copy()))
        if observer is not None:
            observer(st)

    state = start
    record(state)
    done = 0
    while done < n_total:
        if stop is not None:
            reason = stop(state)
            if reason:
                traj.stop_reason = reason
                break
        n = min(params.monitor_every, n_total - done)
        state = _advance(state, params, n, dt)
        state.residual = _identity_defect(state, start, params)
        done += n
        record(state)
    else:
        if stop is not None and traj.stop_reason is None:
            traj.stop_reason = stop(state)
    traj.final = state
    return traj


def stefan_identity_residual(traj: Trajectory, params: Optional[SolveParams] = None) -> float:
    """max_t |[int u dx + (d/mu) h]_0^t - int_0^t int (a u - b u^2) dx ds| over monitor rows."""
    params = params or traj.params
    if not params.bc.is_neumann:
        raise UnsupportedBC("the Stefan identity check needs zero flux at x = 0 (alpha = 0)")
    if params.mu == 0:
        raise ValueError("the identity involves d/mu; mu must be positive")
    res = traj.column("residual")
    return float(np.max(np.abs(res))) if res.size else 0.0
