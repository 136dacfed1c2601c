"""Bisect the spreading threshold in mu for a = b = d = 1, zero flux, h0 = frac * h*."""
import argparse
import json
import time

from periodic_fbp.coefficients import RobinBC, constant
from periodic_fbp.dichotomy import critical_length, critical_mu
from periodic_fbp.fbp import SolveParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fracs", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--tol", type=float, default=0.01)
    ap.add_argument("--ny", type=int, default=256)
    args = ap.parse_args()

    base = SolveParams(1.0, 1.0, 1.0, RobinBC.neumann(), constant(1.0), constant(1.0, role="b"), ny=args.ny)
    hs = critical_length(base).hstar
    print(f"h* = {hs:.6f}")
    for frac in args.fracs:
        t0 = time.perf_counter()
        r = critical_mu(base.replace(h0=frac * hs), tol_mu=args.tol, hstar=hs)
        print(json.dumps({"h0/h*": frac, "mu_lo": r.mu_lo, "mu_hi": r.mu_hi, "probes": len(r.probes),
                          "faults": r.faults, "seconds": round(time.perf_counter() - t0, 1)}))


if __name__ == "__main__":
    main()
