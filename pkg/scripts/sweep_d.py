"""Sign of lambda1(h0; d, a) and classification verdicts across diffusion rates (patch family)."""
import argparse

import numpy as np

from periodic_fbp.coefficients import RobinBC, build_family, constant
from periodic_fbp.dichotomy import criteria_in_d
from periodic_fbp.fbp import SolveParams

PATCH = {"kind": "patch", "T": 1.0,
         "params": {"m0": 1.0, "m1": 0.5, "s_plus": 3.0, "gamma": 0.5, "center": 2.0, "halfwidth": 0.5}}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h0", type=float, default=3.0)
    ap.add_argument("--d", type=float, nargs="+", default=list(np.logspace(-2, 2, 9)))
    ap.add_argument("--mu", type=float, nargs="*", default=[1.0])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    p = SolveParams(1.0, 1.0, args.h0, RobinBC.neumann(), build_family(PATCH), constant(1.0, role="b"))
    rows = criteria_in_d(p, args.d, mu_samples=args.mu, budget=100.0, workers=args.workers)
    print("d,lambda1_h0,side,consistent,verdicts")
    for r in rows:
        print(f"{r.d:.4g},{r.lambda1_h0:.6f},{r.side},{r.consistent},{dict(r.verdicts)}")


if __name__ == "__main__":
    main()
