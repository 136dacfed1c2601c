"""Command line entry point: ``periodic-fbp <subcommand> --config run.yaml --out dir``.

Exit status: 0 decided/converged, 2 undecided/not converged, 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config as C
from .coefficients import AsymptoticProfile, CoefficientError
from .dichotomy import (BracketFailure, BudgetExceeded, classify, critical_mu, criteria_in_d)
from .eigen import EigenProblem, NoConvergence, NoSignChange, bracket_hstar, find_hstar, principal_eigenvalue
from .fbp import SolverError, UnsupportedBC, simulate, stefan_identity_residual
from .speed import TooShort, empirical_speed, speed_bounds

log = logging.getLogger("periodic_fbp")

EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED = 0, 1, 2
SUBCOMMANDS = ("simulate", "eigen", "hstar", "classify", "critical-mu", "sweep-d", "speed")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def field_csv(t: np.ndarray, x: np.ndarray, values: np.ndarray, name: str) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(("t", "x", name))
    for i, ti in enumerate(t):
        for j, xj in enumerate(x):
            wr.writerow((repr(float(ti)), repr(float(xj)), repr(float(values[i, j]))))
    return buf.getvalue()


def _summary(cfg: C.RunConfig, command: str, status: str, result: dict) -> str:
    return dumps({"command": command, "status": status, "result": result, "config": cfg.resolved()})


def cmd_simulate(cfg, out, args):
    params = cfg.solve_params()
    traj = simulate(params)
    res = traj.summary()
    res["stefan_identity_residual"] = (stefan_identity_residual(traj)
                                       if params.bc.is_neumann and params.mu > 0 else None)
    res["dt"] = traj.dt
    write_atomic(out / "trajectory.csv", traj.to_csv())
    return EXIT_OK, "completed", res


def cmd_eigen(cfg, out, args):
    n = cfg.numerics
    ell = float(cfg.get("ell", cfg.problem.h0))
    prob = EigenProblem(cfg.problem.d, cfg.a, ell, cfg.bc, nx=n.nx, nt=n.nt)
    try:
        r = principal_eigenvalue(prob)
    except NoConvergence as exc:
        return EXIT_UNDECIDED, "no-convergence", {"lambda1": exc.estimate, "residual": exc.residual,
                                                  "message": str(exc)}
    res = r.summary()
    res["ell"] = ell
    if cfg.output.profile_csv:
        write_atomic(out / "eigenfunction.csv", field_csv(r.t, r.x, r.phi, "phi"))
    return EXIT_OK, "converged", res


def cmd_hstar(cfg, out, args):
    d, a, bc = cfg.problem.d, cfg.a, cfg.bc
    tol_len = float(cfg.get("tol_len", 1e-4))
    try:
        br = cfg.get("bracket")
        if br is None:
            br = bracket_hstar(d, a, bc, ell_max=float(cfg.get("ell_max", 256.0)))
        h = find_hstar(d, a, bc, bracket=tuple(map(float, br)), tol_len=tol_len)
    except NoSignChange as exc:
        lad = getattr(exc, "ladder", None)
        res = {"message": str(exc), "hstar": None}
        if lad is not None:
            res["ladder"] = {"lengths": lad.lengths, "lambda1": lad.values}
        return EXIT_UNDECIDED, "no-sign-change", res
    return EXIT_OK, "converged", {"hstar": h.hstar, "lambda_at": h.lambda_at,
                                  "bracket": list(h.bracket), "evaluations": h.evaluations}


def _classify_kw(cfg):
    return {"tol_front": cfg.numerics.tol_front, "tol_u": cfg.numerics.tol_u,
            "delta_frac": float(cfg.get("delta_frac", 1e-2))}


def cmd_classify(cfg, out, args):
    c = classify(cfg.solve_params(), budget=cfg.numerics.budget, **_classify_kw(cfg))
    code = EXIT_OK if c.decided else EXIT_UNDECIDED
    return code, "decided" if c.decided else "undecided", c.summary()


def cmd_critical_mu(cfg, out, args):
    bracket = tuple(map(float, cfg.get("bracket", (0.1, 10.0))))
    try:
        r = critical_mu(cfg.solve_params(), bracket=bracket, budget=cfg.numerics.budget,
                        tol_mu=float(cfg.get("tol_mu", 0.01)), **_classify_kw(cfg))
    except BudgetExceeded as exc:
        return EXIT_UNDECIDED, "budget-exceeded", {"message": str(exc)}
    return EXIT_OK, "all-mu-spread" if r.all_spread else "bracketed", r.summary()


def cmd_sweep_d(cfg, out, args):
    d_grid = [float(v) for v in cfg.get("d_grid", [])]
    if not d_grid:
        raise C.ConfigError("command.d_grid", "sweep-d needs a non-empty list of d values")
    mus = [float(v) for v in cfg.get("mu_samples", [])]
    rows = criteria_in_d(cfg.solve_params(), d_grid, mus, budget=cfg.numerics.budget,
                         workers=args.workers)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["d", "lambda1_h0", "side", "consistent"] + [f"mu={m!r}" for m in mus])
    for r in rows:
        wr.writerow([repr(r.d), repr(r.lambda1_h0), r.side, r.consistent] + [r.verdicts[m] for m in mus])
    write_atomic(out / "table.csv", buf.getvalue())
    undecided = any(v == "Undecided" for r in rows for v in r.verdicts.values())
    res = {"rows": [r.summary() for r in rows], "all_consistent": all(r.consistent for r in rows)}
    return (EXIT_UNDECIDED if undecided else EXIT_OK), "undecided" if undecided else "decided", res


def cmd_speed(cfg, out, args):
    p = cfg.problem
    try:
        profile = AsymptoticProfile.from_pair(cfg.a, cfg.b)
    except CoefficientError as exc:
        raise C.ConfigError("coefficients", str(exc)) from None
    kw = {k: cfg.get(k) for k in ("L", "dx", "nt") if cfg.get(k) is not None}
    res = {"kbar_lower": None, "kbar_upper": None, "empirical_slope": None,
           "band_enabled": False, "note": "", "residuals": {}}
    try:
        sb = speed_bounds(p.mu, p.d, profile, **kw)
    except NoConvergence as exc:
        return EXIT_UNDECIDED, "no-convergence", {"message": str(exc)}
    res["band_enabled"], res["note"] = sb.band_enabled, sb.note
    if sb.band_enabled:
        lo, hi = sb.lower, sb.upper
        res["kbar_lower"], res["kbar_upper"] = lo.kbar, hi.kbar
        res["residuals"].update({"lower": lo.residual, "upper": hi.residual,
                                 "far_field_lower": lo.far_field_gap, "far_field_upper": hi.far_field_gap})
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(("t", "k0_lower", "k0_upper"))
        for t, kl, ku in zip(lo.t, lo.k0, hi.k0):
            wr.writerow((repr(float(t)), repr(float(kl)), repr(float(ku))))
        write_atomic(out / "k0.csv", buf.getvalue())
        if cfg.output.profile_csv:
            tt = np.linspace(0.0, p.T, lo.w.shape[0])
            write_atomic(out / "semiwave_lower.csv", field_csv(tt, lo.x, lo.w, "w"))
    if cfg.get("empirical", False):
        traj = simulate(cfg.solve_params())
        try:
            e = empirical_speed(traj, window=float(cfg.get("window", 0.5)))
            res["empirical_slope"] = e.slope
            res["residuals"]["fit"] = e.residual
        except TooShort as exc:
            res["note"] = (res["note"] + "; " if res["note"] else "") + str(exc)
    return EXIT_OK, "converged", res


HANDLERS = {"simulate": cmd_simulate, "eigen": cmd_eigen, "hstar": cmd_hstar,
            "classify": cmd_classify, "critical-mu": cmd_critical_mu, "sweep-d": cmd_sweep_d,
            "speed": cmd_speed}


def _setup_logging():
    level = os.environ.get("STEFAN_LOG", "WARNING").upper()
    if level.isdigit():
        lvl = int(level)
    else:
        lvl = logging.getLevelName(level)
        if not isinstance(lvl, int):
            lvl = logging.WARNING
    logging.basicConfig(level=lvl, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="periodic-fbp", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="YAML run configuration")
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = C.load(args.config)
        if args.workers < 1:
            raise C.ConfigError("--workers", "must be >= 1")
        code, status, result = HANDLERS[args.command](cfg, out, args)
        write_atomic(out / "summary.json", _summary(cfg, args.command, status, result))
    except C.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (SolverError, UnsupportedBC, BracketFailure, NoConvergence, ValueError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
