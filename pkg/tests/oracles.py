"""Independent reference computations used by the tests.

Nothing here touches the package's solvers.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def semiwave_slope(k, d=1.0, p=1.0, q=1.0, eps=1e-9):
    """w'(0) of the monotone solution of d w'' - k w' + p w - q w^2 = 0, w(0)=0, w(inf)=p/q.

    Integrates backwards along the stable manifold of the saddle (p/q, 0).
    """
    ws = p / q
    # linearisation at ws: d z' = k z + p (w - ws)
    lam = (k / d - math.sqrt((k / d) ** 2 + 4 * p / d)) / 2
    y0 = [ws - eps, -eps * lam]

    def rhs(x, y):
        w, z = y
        return [z, (k * z - p * w + q * w * w) / d]

    def hit_zero(x, y):
        return y[0]
    hit_zero.terminal = True
    sol = solve_ivp(rhs, [0.0, -400.0], y0, events=hit_zero, rtol=1e-12, atol=1e-14, method="DOP853")
    if not sol.t_events[0].size:
        raise RuntimeError("backward orbit never reached w = 0")
    return float(sol.y_events[0][0][1])


def semiwave_speed(mu, d=1.0, p=1.0, q=1.0):
    """Root of mu * w'(0; k) = k on (0, 2 sqrt(d p))."""
    cstar = 2 * math.sqrt(d * p)
    return brentq(lambda k: mu * semiwave_slope(k, d, p, q) - k, 1e-9, cstar * (1 - 1e-9), xtol=1e-12)


def heat_sine_decay(d, ell, t):
    """Amplitude factor of the first Dirichlet mode of u_t = d u_xx on (0, ell)."""
    return math.exp(-d * (math.pi / ell) ** 2 * t)


def trapezoid_error_order(f, exact, a, b, ns):
    errs = []
    for n in ns:
        x = np.linspace(a, b, n + 1)
        errs.append(abs(np.trapezoid(f(x), x) - exact))
    return [math.log2(e1 / e2) for e1, e2 in zip(errs, errs[1:])]
