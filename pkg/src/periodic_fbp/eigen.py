"""Principal eigenvalue of the T-periodic problem phi_t - d phi_xx - a phi = lambda phi.

The eigenvalue is read off the period map P (one period of phi_t = d phi_xx + a phi,
Robin at the left end, Dirichlet at the right): lambda1 = -ln r / T with r the
spectral radius of P, found by power iteration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .coefficients import PeriodicCoefficient, RobinBC

log = logging.getLogger(__name__)

NX_MAX = 1024
NT_MAX = 4000


class NoConvergence(RuntimeError):
    def __init__(self, msg, estimate=None, residual=None):
        super().__init__(msg)
        self.estimate = estimate
        self.residual = residual


class NoSignChange(RuntimeError):
    pass


class MonotonicityViolation(RuntimeError):
    pass


def default_nx(ell: float) -> int:
    return int(min(max(64, math.ceil(32 * ell)), NX_MAX))


@dataclass(frozen=True)
class EigenProblem:
    d: float
    a: PeriodicCoefficient
    ell: float
    bc: RobinBC
    nx: int | None = None
    nt: int = 200
    x0: float = 0.0
    richardson: int = 2

    def __post_init__(self):
        if not self.ell > 0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.nx is not None and self.nx < 16:
            raise ValueError("nx too small to resolve the problem")

    @property
    def steps(self) -> int:
        """Base step count: p.nt, raised so dt * (d pi^2/ell^2 + sup|a|) <= 0.1 on stiff problems.

        Capped at NT_MAX; beyond it the value is underestimated but its sign,
        which is all the length and diffusion ladders need, is kept.
        """
        rate = self.d * (math.pi / self.ell) ** 2 + self.a.sup_norm
        return min(max(self.nt, int(math.ceil(self.a.T * rate / 0.1))), max(self.nt, NT_MAX))

    @property
    def n_interior(self) -> int:
        return self.nx if self.nx is not None else default_nx(self.ell)

    @property
    def x(self) -> np.ndarray:
        N = self.n_interior + 1
        return self.x0 + np.linspace(0.0, self.ell, N + 1)


class PeriodMap:
    """Linear time-T solution operator on the unknown nodes of a fixed grid."""

    def __init__(self, problem: EigenProblem, nt: int | None = None):
        self.problem = problem
        p = problem
        self.nt = nt or p.steps
        self.T = p.a.T
        self.dt = self.T / self.nt
        N = p.n_interior + 1
        self.x = p.x
        dx = p.ell / N
        self.left_dirichlet = p.bc.is_dirichlet
        self.i0 = 1 if self.left_dirichlet else 0
        self.nodes = np.arange(self.i0, N)
        tm = (np.arange(self.nt) + 0.5) * self.dt
        a_tab = p.a.table(tm, self.x[self.nodes])
        self.growth = np.exp(a_tab * self.dt)
        r = p.d * self.dt / dx**2
        ghost = 0.0 if self.left_dirichlet else 2.0 * dx * p.bc.alpha / p.bc.beta
        lower, diag, upper = K.diffusion_matrix(len(self.nodes), r, ghost, self.left_dirichlet)
        self.lower = lower
        self.cp, self.piv = K.thomas_factor(lower, diag, upper)

    @property
    def size(self) -> int:
        return len(self.nodes)

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.array(v, dtype=float)
        rec = np.empty((self.nt + 1, v.size))
        K.propagate_vector(v, self.growth, self.lower, self.cp, self.piv, rec)
        return v

    def trajectory(self, v: np.ndarray, chunk: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Rows at every step and their log scale factors: true row k = rows[k] * exp(logs[k])."""
        v = np.array(v, dtype=float)
        rows = np.empty((self.nt + 1, v.size))
        logs = np.zeros(self.nt + 1)
        rows[0] = v
        acc = 0.0
        for k in range(0, self.nt, chunk):
            g = self.growth[k:k + chunk]
            rec = np.empty((g.shape[0] + 1, v.size))
            K.propagate_vector(v, g, self.lower, self.cp, self.piv, rec)
            rows[k + 1:k + 1 + g.shape[0]] = rec[1:]
            logs[k + 1:k + 1 + g.shape[0]] = acc
            s = float(np.max(np.abs(v)))
            v /= s
            acc += math.log(s)
        return rows, logs

    def matrix(self, chunk: int = 64) -> np.ndarray:
        """Period map up to the factor exp(self.log_scale).

        Columns are propagated ``chunk`` steps at a time and rescaled, so
        strongly decaying maps do not underflow.
        """
        Y = np.eye(self.size)
        self.log_scale = 0.0
        for k in range(0, self.nt, chunk):
            K.propagate_columns(Y, self.growth[k:k + chunk], self.lower, self.cp, self.piv)
            s = float(np.max(np.abs(Y)))
            if s == 0.0:
                raise NoConvergence("period map vanished while propagating")
            Y /= s
            self.log_scale += math.log(s)
        return Y

    def full_field(self, values: np.ndarray) -> np.ndarray:
        """Embed unknown-node values (last axis) into all grid nodes."""
        shape = values.shape[:-1] + (len(self.x),)
        out = np.zeros(shape)
        out[..., self.nodes] = values
        return out


@dataclass
class PowerResult:
    r: float
    vector: np.ndarray
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    log_r: float = math.nan


def power_iteration(P: np.ndarray, v0: np.ndarray | None = None, tol: float = 1e-8,
                    max_iter: int = 500, square_every: int = 10) -> PowerResult:
    """Sup-norm power iteration on a nonnegative matrix.

    Every ``square_every`` iterations the iterated operator is squared, so slow
    spectral gaps are handled without extra period evaluations. Both the
    radius estimate and the normalized vector must settle: on long domains a
    flat start vector keeps max|Pv| pinned near 1 long before v is an
    eigenvector.
    """
    n = P.shape[0]
    v = np.ones(n) if v0 is None else np.abs(np.asarray(v0, dtype=float)) + 1e-300
    v = v / np.max(np.abs(v))
    Q = P.copy()
    log_scale = 0.0
    m = 1
    r_prev = math.nan
    history = []
    for it in range(1, max_iter + 1):
        w = Q @ v
        g = np.max(np.abs(w))
        if g == 0.0:
            return PowerResult(0.0, v, it, True, history, -math.inf)
        log_r = (math.log(g) + log_scale) / m
        r = math.exp(log_r)
        history.append(r)
        w /= g
        dv = float(np.max(np.abs(w - v)))
        v = w
        if abs(r - r_prev) < tol * r and dv < tol:
            return PowerResult(r, v, it, True, history, log_r)
        r_prev = r
        if it % square_every == 0 and m < 2**40:
            Q = Q @ Q
            s = np.max(np.abs(Q))
            Q /= s
            log_scale = 2.0 * log_scale + math.log(s)
            m *= 2
    return PowerResult(r_prev, v, max_iter, False, history, math.log(r_prev) if r_prev > 0 else -math.inf)


@dataclass
class EigenResult:
    lambda1: float
    phi: np.ndarray           # (nt+1, nx+2) on [0,T] x [x0, x0+ell], max = 1
    t: np.ndarray
    x: np.ndarray
    period_map_radius: float
    iterations: int
    residual: float
    lambda_coarse: float = math.nan
    lambda_fine: float = math.nan

    def summary(self) -> dict:
        return {"lambda1": self.lambda1, "r": self.period_map_radius,
                "iterations": self.iterations, "residual": self.residual}


def _radius(pm: PeriodMap, v0, tol, max_iter) -> PowerResult:
    res = power_iteration(pm.matrix(), v0, tol=tol, max_iter=max_iter)
    res.log_r += pm.log_scale
    res.r = math.exp(res.log_r)
    if not res.converged:
        lam = -res.log_r / pm.T
        h = res.history
        raise NoConvergence(f"power iteration did not settle in {max_iter} iterations "
                            f"(last lambda estimate {lam:.6g})", estimate=lam,
                            residual=abs(h[-1] - h[-2]) / h[-1] if len(h) > 1 else None)
    return res


def principal_eigenvalue(p: EigenProblem, v0: np.ndarray | None = None,
                         tol: float = 1e-8, max_iter: int = 500) -> EigenResult:
    """lambda1(ell; d, a) with its positive periodic eigenfunction.

    The period map is built with nt, 2nt, ... steps (``p.richardson`` extra
    levels) and the eigenvalues are Richardson-extrapolated, cancelling the
    O(dt) and O(dt^2) errors of the split backward-Euler stepper.
    """
    levels = int(p.richardson)
    maps = [PeriodMap(p, nt=p.steps * 2**j) for j in range(levels + 1)]
    if v0 is not None and len(v0) != maps[-1].size:
        v0 = None
    lams, iterations = [], 0
    vec = v0
    for pm in reversed(maps):
        res = _radius(pm, vec, tol, max_iter)
        if pm is maps[-1]:
            finest = res
        vec = res.vector
        iterations += res.iterations
        lams.insert(0, -res.log_r / pm.T)
    table = list(lams)
    for m in range(1, levels + 1):
        table = [(2**m * table[j + 1] - table[j]) / (2**m - 1) for j in range(len(table) - 1)]
    lam = table[0]
    r = math.exp(-lam * p.a.T)

    fine = maps[-1]
    rows, logs = fine.trajectory(finest.vector)
    t = np.linspace(0.0, fine.T, fine.nt + 1)
    phi = rows * np.exp(logs + lams[-1] * t)[:, None]
    residual = float(np.max(np.abs(phi[-1] - phi[0])) / np.max(np.abs(phi)))
    phi = fine.full_field(phi / np.max(phi))
    log.debug("lambda1(ell=%g, d=%g) = %.10g (r=%.10g, %d its)", p.ell, p.d, lam, r, iterations)
    return EigenResult(lam, phi, t, fine.x, r, iterations, residual, lams[0], lams[-1])


def eigenvalue(d: float, a: PeriodicCoefficient, ell: float, bc: RobinBC, **kw) -> float:
    return principal_eigenvalue(EigenProblem(d, a, ell, bc, **kw)).lambda1


@dataclass
class Ladder:
    lengths: list
    values: list
    decreasing: bool

    @property
    def last(self) -> float:
        return self.values[-1]


def lambda_infinity(d: float, a: PeriodicCoefficient, bc: RobinBC, ell_max: float,
                    ell0: float = 1.0, tol: float = 1e-6, stop_when_negative: bool = False,
                    **kw) -> Ladder:
    """lambda1 on the ladder ell0 * 2^j <= ell_max; the last entry approximates lambda1(inf)."""
    if not math.isfinite(ell_max) or ell_max < ell0:
        raise ValueError("ell_max must be finite and >= ell0")
    lengths, values = [], []
    ell = ell0
    while ell <= ell_max * (1 + 1e-12):
        lam = eigenvalue(d, a, ell, bc, **kw)
        if values and lam > values[-1] + tol:
            raise MonotonicityViolation(
                f"lambda1 increased from {values[-1]:.8g} at ell={lengths[-1]:g} to {lam:.8g} at ell={ell:g}")
        lengths.append(ell)
        values.append(lam)
        if stop_when_negative and lam < 0:
            break
        ell *= 2.0
    decreasing = all(v2 < v1 for v1, v2 in zip(values, values[1:]))
    return Ladder(lengths, values, decreasing)


@dataclass
class HStar:
    hstar: float
    lambda_at: float
    bracket: tuple
    evaluations: int


def bracket_hstar(d, a, bc, ell0: float = 0.25, ell_max: float = 256.0, **kw) -> tuple[float, float]:
    ladder = lambda_infinity(d, a, bc, ell_max, ell0=ell0, stop_when_negative=True, **kw)
    if ladder.last >= 0:
        exc = NoSignChange(f"lambda1 > 0 on every probed length up to {ladder.lengths[-1]:g} "
                           f"(last value {ladder.last:.6g})")
        exc.ladder = ladder
        raise exc
    if len(ladder.lengths) == 1:
        lo = ell0
        while lo > 1e-6:
            lo /= 2.0
            if eigenvalue(d, a, lo, bc, **kw) > 0:
                return lo, 2.0 * lo
        raise NoSignChange("lambda1 < 0 on arbitrarily short domains")
    return ladder.lengths[-2], ladder.lengths[-1]


def find_hstar(d: float, a: PeriodicCoefficient, bc: RobinBC, bracket: tuple | None = None,
               tol_len: float = 1e-4, **kw) -> HStar:
    """Root of ell -> lambda1(ell; d, a) by bisection (lambda1 decreases in ell)."""
    search = {k: kw.pop(k) for k in ("ell0", "ell_max") if k in kw}
    lo, hi = bracket if bracket is not None else bracket_hstar(d, a, bc, **search, **kw)
    lam_lo = eigenvalue(d, a, lo, bc, **kw)
    lam_hi = eigenvalue(d, a, hi, bc, **kw)
    evals = 2
    if lam_lo < 0 or lam_hi > 0:
        if lam_lo > 0 and lam_hi > 0:
            raise NoSignChange(f"lambda1 > 0 on [{lo:g}, {hi:g}]")
        raise NoSignChange(f"bracket [{lo:g}, {hi:g}] does not straddle the root "
                           f"(lambda1 = {lam_lo:.6g}, {lam_hi:.6g})")
    lam_mid = lam_hi
    while hi - lo > tol_len * 0.5 * (lo + hi):
        mid = 0.5 * (lo + hi)
        lam_mid = eigenvalue(d, a, mid, bc, **kw)
        evals += 1
        if lam_mid > 0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    lam_root = eigenvalue(d, a, root, bc, **kw)
    return HStar(root, lam_root, (lo, hi), evals + 1)


@dataclass
class DMembership:
    d: float
    lambda1: float

    @property
    def side(self) -> str:
        return "minus" if self.lambda1 <= 0 else "plus"


def classify_d(ell: float, a: PeriodicCoefficient, bc: RobinBC, d: float, **kw) -> DMembership:
    """Which of Sigma_ell^- (lambda1 <= 0) or Sigma_ell^+ contains d."""
    if not d > 0:
        raise ValueError("d must be positive")
    return DMembership(d, eigenvalue(d, a, ell, bc, **kw))
