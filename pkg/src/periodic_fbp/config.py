"""YAML run configuration with key-path validation errors.

Layout::

    problem:      {d, mu, h0, T, bc: {alpha, beta}}
    coefficients: {a: {kind, T?, params}, b: {kind, T?, params}}
    numerics:     {ny, dt, t_end, nx, nt, tol_neg, tol_front, tol_u, budget, kappa}
    command:      subcommand parameters (ell, bracket, tol_mu, d_grid, mu_samples, ...)
    output:       {monitor_every, profile_csv}
"""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .coefficients import CoefficientError, PeriodicCoefficient, RobinBC, build_family
from .fbp import SolveParams


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass
class Problem:
    d: float = 1.0
    mu: float = 1.0
    h0: float = 1.0
    T: float = 1.0
    bc: dict = field(default_factory=lambda: {"alpha": 0.0, "beta": 1.0})


@dataclass
class Numerics:
    ny: int = 256
    dt: float | None = None
    t_end: float = 10.0
    nx: int | None = None
    nt: int = 200
    tol_neg: float = 1e-12
    tol_front: float = 1e-6
    tol_u: float = 1e-6
    budget: float | None = None
    kappa: float = 1.0


@dataclass
class Output:
    monitor_every: int = 10
    profile_csv: bool = True


@dataclass
class RunConfig:
    problem: Problem
    coefficients: dict
    numerics: Numerics
    command: dict
    output: Output

    a: PeriodicCoefficient = field(init=False, repr=False, compare=False)
    b: PeriodicCoefficient = field(init=False, repr=False, compare=False)
    bc: RobinBC = field(init=False, repr=False, compare=False)

    def resolved(self) -> dict:
        """Plain-data view with every default filled in (embedded in JSON outputs)."""
        return {"problem": asdict(self.problem), "coefficients": copy.deepcopy(self.coefficients),
                "numerics": asdict(self.numerics), "command": copy.deepcopy(self.command),
                "output": asdict(self.output)}

    def solve_params(self, **overrides) -> SolveParams:
        p, n = self.problem, self.numerics
        kw = dict(d=p.d, mu=p.mu, h0=p.h0, bc=self.bc, a=self.a, b=self.b, ny=n.ny, dt=n.dt,
                  t_end=n.t_end, monitor_every=self.output.monitor_every, kappa=n.kappa,
                  tol_neg=n.tol_neg)
        kw.update(overrides)
        return SolveParams(**kw)

    def get(self, key: str, default=None):
        return self.command.get(key, default)


def _section(raw: dict, name: str, cls):
    block = raw.get(name, {}) or {}
    if not isinstance(block, dict):
        raise ConfigError(name, "must be a mapping")
    known = set(cls.__dataclass_fields__)
    for k in block:
        if k not in known:
            raise ConfigError(f"{name}.{k}", f"unknown key (expected one of {', '.join(sorted(known))})")
    return cls(**block)


def _number(path: str, v, positive=False, nonneg=False, integer=False, optional=False):
    if v is None and optional:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(path, "must be finite")
    if integer and int(v) != v:
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(path, f"must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(path, f"must be non-negative, got {v!r}")
    return int(v) if integer else float(v)


def from_dict(raw: Any) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    for k in raw:
        if k not in ("problem", "coefficients", "numerics", "command", "output"):
            raise ConfigError(k, "unknown top-level block")
    problem = _section(raw, "problem", Problem)
    numerics = _section(raw, "numerics", Numerics)
    output = _section(raw, "output", Output)
    command = dict(raw.get("command", {}) or {})

    problem.d = _number("problem.d", problem.d, positive=True)
    problem.mu = _number("problem.mu", problem.mu, nonneg=True)
    problem.h0 = _number("problem.h0", problem.h0, positive=True)
    problem.T = _number("problem.T", problem.T, positive=True)
    if not isinstance(problem.bc, dict) or set(problem.bc) != {"alpha", "beta"}:
        raise ConfigError("problem.bc", "expected a mapping with keys alpha and beta")
    alpha = _number("problem.bc.alpha", problem.bc["alpha"], nonneg=True)
    beta = _number("problem.bc.beta", problem.bc["beta"], nonneg=True)
    problem.bc = {"alpha": alpha, "beta": beta}

    numerics.ny = _number("numerics.ny", numerics.ny, positive=True, integer=True)
    numerics.dt = _number("numerics.dt", numerics.dt, positive=True, optional=True)
    numerics.t_end = _number("numerics.t_end", numerics.t_end, nonneg=True)
    numerics.nx = _number("numerics.nx", numerics.nx, positive=True, integer=True, optional=True)
    numerics.nt = _number("numerics.nt", numerics.nt, positive=True, integer=True)
    for name in ("tol_neg", "tol_front", "tol_u", "kappa"):
        setattr(numerics, name, _number(f"numerics.{name}", getattr(numerics, name), positive=True))
    numerics.budget = _number("numerics.budget", numerics.budget, positive=True, optional=True)
    output.monitor_every = _number("output.monitor_every", output.monitor_every, positive=True, integer=True)

    coefs = raw.get("coefficients")
    if not isinstance(coefs, dict):
        raise ConfigError("coefficients", "missing block with families a and b")
    resolved_coefs = {}
    built = {}
    for role in ("a", "b"):
        spec = coefs.get(role)
        if not isinstance(spec, dict):
            raise ConfigError(f"coefficients.{role}", "missing family descriptor")
        spec = {"T": problem.T, **spec}
        spec.setdefault("params", {})
        try:
            built[role] = build_family(spec, role=role)
        except CoefficientError as exc:
            raise ConfigError(f"coefficients.{role}", str(exc)) from None
        if built[role].T != problem.T:
            raise ConfigError(f"coefficients.{role}.T",
                              f"period {built[role].T} differs from problem.T = {problem.T}")
        resolved_coefs[role] = {"kind": spec["kind"], "T": float(spec["T"]),
                                "params": {k: float(v) for k, v in spec["params"].items()}}
    for role in coefs:
        if role not in ("a", "b"):
            raise ConfigError(f"coefficients.{role}", "unknown coefficient (expected a or b)")

    cfg = RunConfig(problem, resolved_coefs, numerics, command, output)
    try:
        cfg.bc = RobinBC(alpha, beta)
    except CoefficientError as exc:
        raise ConfigError("problem.bc", str(exc)) from None
    cfg.a, cfg.b = built["a"], built["b"]
    return cfg


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from None
    return from_dict(raw)
