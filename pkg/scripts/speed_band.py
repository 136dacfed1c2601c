"""Semi-wave speed band for the oscillating family against the empirical front slope."""
import argparse
import math

from periodic_fbp.coefficients import AsymptoticProfile, RobinBC, build_family, constant
from periodic_fbp.fbp import SolveParams, simulate
from periodic_fbp.speed import empirical_speed, kbar, speed_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    ap.add_argument("--c", type=float, default=0.3)
    ap.add_argument("--a1", type=float, default=0.5)
    ap.add_argument("--t-end", type=float, default=60.0)
    ap.add_argument("--ny", type=int, default=512)
    args = ap.parse_args()

    a = build_family({"kind": "oscillating", "T": 1.0,
                      "params": {"a0": 1.0, "a1": args.a1, "c": args.c, "omega": 2 * math.pi}})
    b = constant(1.0, role="b")
    prof = AsymptoticProfile.from_pair(a, b)
    print("mu,kbar_lower,kbar_upper,empirical_slope,kbar_mean_coefficients")
    for mu in args.mu:
        lo, hi = speed_bounds(mu, 1.0, prof).interval
        traj = simulate(SolveParams(1.0, mu, 2.0, RobinBC.neumann(), a, b, ny=args.ny, t_end=args.t_end,
                                    monitor_every=20))
        slope = empirical_speed(traj).slope
        print(f"{mu},{lo:.5f},{hi:.5f},{slope:.5f},{kbar(mu, 1.0, 1.0, 1.0):.5f}")


if __name__ == "__main__":
    main()
