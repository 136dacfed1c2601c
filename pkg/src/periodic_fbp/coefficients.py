"""Time-periodic coefficient fields a(t, x), b(t, x) and the Robin operator at x = 0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Mapping

import numpy as np

from . import _kernels as K


class CoefficientError(ValueError):
    pass


@dataclass(frozen=True)
class RobinBC:
    """B[u] = alpha*u - beta*u_x at x = 0, alpha, beta >= 0, alpha + beta = 1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise CoefficientError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if abs(self.alpha + self.beta - 1.0) > 1e-12:
            raise CoefficientError(f"alpha + beta must equal 1, got {self.alpha + self.beta}")

    @classmethod
    def dirichlet(cls) -> "RobinBC":
        return cls(1.0, 0.0)

    @classmethod
    def neumann(cls) -> "RobinBC":
        return cls(0.0, 1.0)

    @property
    def is_dirichlet(self) -> bool:
        return self.beta == 0.0

    @property
    def is_neumann(self) -> bool:
        return self.alpha == 0.0

    def apply(self, u0: float, ux0: float) -> float:
        return self.alpha * u0 - self.beta * ux0


@dataclass(frozen=True)
class Asymptotics:
    """Large-x envelope of one coefficient: liminf/limsup of value / x^rho."""

    rho: float
    lower: Callable[[np.ndarray], np.ndarray]
    upper: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AsymptoticProfile:
    """User-declared limits (4.3-type) of a/x^rho and b as x -> infinity."""

    rho: float
    a_inf: Callable[[np.ndarray], np.ndarray]
    a_sup: Callable[[np.ndarray], np.ndarray]
    b_inf: Callable[[np.ndarray], np.ndarray]
    b_sup: Callable[[np.ndarray], np.ndarray]
    T: float

    def __post_init__(self):
        if not (-2.0 < self.rho <= 0.0):
            raise CoefficientError(f"rho must lie in (-2, 0], got {self.rho}")
        t = np.linspace(0.0, self.T, 257)
        ai, asup = self.a_inf(t), self.a_sup(t)
        bi, bsup = self.b_inf(t), self.b_sup(t)
        if np.any(ai <= 0) or np.any(bi <= 0):
            raise CoefficientError("asymptotic profile functions must be strictly positive")
        if np.any(ai > asup + 1e-14) or np.any(bi > bsup + 1e-14):
            raise CoefficientError("asymptotic profile needs a_inf <= a_sup and b_inf <= b_sup")

    @classmethod
    def from_pair(cls, a: "PeriodicCoefficient", b: "PeriodicCoefficient") -> "AsymptoticProfile":
        require_same_period(a, b)
        if a.asymptotics is None or b.asymptotics is None:
            raise CoefficientError(f"families {a.kind!r}/{b.kind!r} declare no asymptotic profile")
        if b.asymptotics.rho != 0.0:
            raise CoefficientError("b must have a rho = 0 profile")
        return cls(a.asymptotics.rho, a.asymptotics.lower, a.asymptotics.upper,
                   b.asymptotics.lower, b.asymptotics.upper, a.T)

    def band(self) -> tuple[float, float]:
        """[min a_inf / max b_sup, max a_sup / min b_inf] on a fine period grid."""
        t = np.linspace(0.0, self.T, 1025)
        lo = self.a_inf(t).min() / self.b_sup(t).max()
        hi = self.a_sup(t).max() / self.b_inf(t).min()
        return float(lo), float(hi)


@dataclass(frozen=True, eq=False)
class PeriodicCoefficient:
    """A T-periodic field evaluated by a compiled family kernel.

    ``params`` is the packed parameter vector the kernel reads; bounds are the
    declared ones, derived from the family formula.
    """

    kind: str
    T: float
    params: np.ndarray = field(repr=False)
    lower_bound: float
    upper_bound: float
    structure: str
    source: Mapping[str, float] = field(default_factory=dict)
    asymptotics: Asymptotics | None = field(default=None, repr=False)

    @property
    def kernel_id(self) -> int:
        return _KIND_IDS[self.kind]

    @property
    def sup_norm(self) -> float:
        return max(abs(self.lower_bound), abs(self.upper_bound))

    def __call__(self, t, x):
        return self.eval(t, x)

    def eval(self, t, x):
        t_arr, x_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        out = K.coef_pairs(self.kernel_id, self.params, t_arr.ravel().copy(), x_arr.ravel().copy())
        if t_arr.ndim == 0:
            return float(out[0])
        return out.reshape(t_arr.shape)

    def table(self, ts, xs) -> np.ndarray:
        return K.coef_table(self.kernel_id, self.params, np.ascontiguousarray(ts, dtype=float),
                            np.ascontiguousarray(xs, dtype=float))

    def time_mean(self, x: float = 0.0, n: int = 512) -> float:
        return integrate_period(lambda t: self.eval(t, x), self.T, n) / self.T

    @property
    def space_independent(self) -> bool:
        return self.structure in ("constant", "time-only")

    def descriptor(self) -> dict:
        return {"kind": self.kind, "T": self.T, "params": dict(self.source)}


_KIND_IDS = {
    "constant": K.CONSTANT,
    "sinusoid": K.SINUSOID,
    "banded": K.BANDED,
    "oscillating": K.OSCILLATING,
    "patch": K.PATCH,
}

FAMILIES = tuple(_KIND_IDS)


def require_same_period(*coefs: PeriodicCoefficient) -> float:
    T = coefs[0].T
    for c in coefs[1:]:
        if c.T != T:
            raise CoefficientError(f"coefficients must share one period, got T={T} and T={c.T}")
    return T


def _interval_product(a_lo, a_hi, b_lo, b_hi):
    prods = (a_lo * b_lo, a_lo * b_hi, a_hi * b_lo, a_hi * b_hi)
    return min(prods), max(prods)


def _sin_profile(t, T, a0, a1, phase=0.0, scale=1.0):
    return scale * (a0 + a1 * np.sin(2.0 * np.pi * np.asarray(t, dtype=float) / T + phase))


def build_family(spec: Mapping, role: str = "a") -> PeriodicCoefficient:
    """Build a coefficient from ``{"kind": ..., "T": ..., "params": {...}}``.

    ``role="b"`` additionally insists on a strictly positive infimum.
    """
    try:
        kind = spec["kind"]
        T = float(spec["T"])
    except KeyError as exc:
        raise CoefficientError(f"family descriptor is missing key {exc.args[0]!r}") from None
    params = {k: float(v) for k, v in dict(spec.get("params", {})).items()}
    if not T > 0 or not math.isfinite(T):
        raise CoefficientError(f"period T must be positive, got {T}")
    if kind not in _KIND_IDS:
        raise CoefficientError(f"unknown family {kind!r}; expected one of {', '.join(FAMILIES)}")
    for name, v in params.items():
        if not math.isfinite(v):
            raise CoefficientError(f"parameter {name!r} is not finite")

    def get(name, default=None):
        if name in params:
            return params[name]
        if default is None:
            raise CoefficientError(f"family {kind!r} needs parameter {name!r}")
        return default

    asym = None
    if kind == "constant":
        c = get("value")
        packed = [T, c]
        lo = hi = c
        structure = "constant"
        f = partial(_sin_profile, T=T, a0=c, a1=0.0)
        asym = Asymptotics(0.0, f, f)
    elif kind == "sinusoid":
        a0, a1, phase = get("a0"), get("a1", 0.0), get("phase", 0.0)
        packed = [T, a0, a1, phase]
        lo, hi = a0 - abs(a1), a0 + abs(a1)
        structure = "time-only" if a1 != 0.0 else "constant"
        f = partial(_sin_profile, T=T, a0=a0, a1=a1, phase=phase)
        asym = Asymptotics(0.0, f, f)
    elif kind == "banded":
        m0, m1 = get("m0", 1.0), get("m1", 0.0)
        s_plus, gamma = get("s_plus"), get("gamma")
        rho, eps0 = get("rho", 0.0), get("eps0", 1e-3)
        x1, q, k, ramp = get("x1"), get("q"), get("k"), get("ramp", 0.05)
        if not (-2.0 < rho <= 0.0):
            raise CoefficientError(f"banded family needs -2 < rho <= 0, got {rho}")
        if eps0 <= 0 or x1 <= 0 or k <= 1 or s_plus <= 0 or gamma < 0 or not (0 < ramp < 1):
            raise CoefficientError("banded family needs eps0, x1, s_plus > 0, gamma >= 0, k > 1, 0 < ramp < 1")
        width = ramp * (k - 1.0)
        if width > 1.0 or q * (1.0 - width) <= k + width:
            raise CoefficientError("banded family: bands and their ramps overlap; increase q or reduce k/ramp")
        packed = [T, m0, m1, s_plus, gamma, rho, eps0, x1, q, k, ramp]
        pw_max = (x1 * (1.0 - width) + eps0) ** rho
        lo, hi = _interval_product(m0 - abs(m1), m0 + abs(m1), -gamma, s_plus * pw_max)
        structure = "banded"
    elif kind == "oscillating":
        a0, a1 = get("a0"), get("a1", 0.0)
        c, omega = get("c", 0.0), get("omega", 1.0)
        rho, eps0 = get("rho", 0.0), get("eps0", 1e-3)
        if not (-2.0 < rho <= 0.0):
            raise CoefficientError(f"oscillating family needs -2 < rho <= 0, got {rho}")
        if not (0.0 <= c < 1.0) or eps0 <= 0:
            raise CoefficientError("oscillating family needs 0 <= c < 1 and eps0 > 0")
        packed = [T, a0, a1, c, omega, rho, eps0]
        s_hi = (1.0 + c) * eps0 ** rho
        s_lo = (1.0 - c) if rho == 0.0 else 0.0
        lo, hi = _interval_product(a0 - abs(a1), a0 + abs(a1), s_lo, s_hi)
        structure = "separable"
        if a0 > abs(a1):
            asym = Asymptotics(rho, partial(_sin_profile, T=T, a0=a0, a1=a1, scale=1.0 - c),
                               partial(_sin_profile, T=T, a0=a0, a1=a1, scale=1.0 + c))
    else:  # patch
        m0, m1 = get("m0", 1.0), get("m1", 0.0)
        s_plus, gamma = get("s_plus"), get("gamma")
        center, halfwidth, ramp = get("center"), get("halfwidth"), get("ramp", 0.05)
        if halfwidth <= 0 or center - halfwidth * (1.0 + 2.0 * ramp) < 0 or s_plus <= 0 or gamma < 0:
            raise CoefficientError("patch family needs halfwidth > 0, s_plus > 0, gamma >= 0 and the patch inside x >= 0")
        packed = [T, m0, m1, s_plus, gamma, center, halfwidth, ramp]
        lo, hi = _interval_product(m0 - abs(m1), m0 + abs(m1), -gamma, s_plus)
        structure = "separable"

    if role == "b" and not lo > 0:
        raise CoefficientError(f"b-coefficient must have a positive infimum, family {kind!r} gives {lo}")
    return PeriodicCoefficient(kind, T, np.asarray(packed, dtype=float), float(lo), float(hi),
                               structure, params, asym)


def constant(value: float, T: float = 1.0, role: str = "a") -> PeriodicCoefficient:
    return build_family({"kind": "constant", "T": T, "params": {"value": value}}, role)


def sinusoid(a0: float, a1: float, T: float = 1.0, role: str = "a", phase: float = 0.0) -> PeriodicCoefficient:
    return build_family({"kind": "sinusoid", "T": T, "params": {"a0": a0, "a1": a1, "phase": phase}}, role)


def integrate_period(f: Callable, T: float, n: int = 512) -> float:
    """Composite trapezoid of f over [0, T] with n panels."""
    t = np.linspace(0.0, T, n + 1)
    return float(np.trapezoid(np.asarray(f(t), dtype=float) * np.ones_like(t), t))


@dataclass
class H1Report:
    passed: bool
    margin: float
    worst_t: float
    worst_x: float


def check_H1(a: PeriodicCoefficient, varsigma: float, rho: float, k: float, xs,
             n_t: int = 64, n_x: int = 64, tol: float = 1e-12) -> H1Report:
    """Sampled certificate that a >= varsigma * x^rho on [0,T] x [x_n, k x_n]."""
    if varsigma <= 0 or not (-2.0 < rho <= 0.0) or k <= 1:
        raise CoefficientError("check_H1 needs varsigma > 0, -2 < rho <= 0, k > 1")
    xs = np.asarray(xs, dtype=float)
    if np.any(np.diff(xs) <= 0) or np.any(xs <= 0):
        raise CoefficientError("band seeds must be positive and increasing")
    ts = np.linspace(0.0, a.T, n_t)
    worst = (math.inf, 0.0, 0.0)
    for xn in xs:
        xg = np.linspace(xn, k * xn, n_x)
        vals = a.table(ts, xg) - varsigma * xg[None, :] ** rho
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] < worst[0]:
            worst = (float(vals[i, j]), float(ts[i]), float(xg[j]))
    margin, wt, wx = worst
    return H1Report(margin >= -tol, margin, wt, wx)


def check_H2(a: PeriodicCoefficient, xhat: float, n: int = 512) -> float:
    """Quadrature value of the period integral of a(t, xhat)."""
    if xhat < 0:
        raise CoefficientError("xhat must be non-negative")
    return integrate_period(lambda t: a.eval(t, np.full_like(t, xhat)), a.T, n)
