"""Compiled inner loops shared by the solvers.

Everything here works on plain float arrays. Coefficient families are
dispatched by an integer kind so one compiled routine serves every family.
"""

import numpy as np
from numba import njit

CONSTANT = 0
SINUSOID = 1
BANDED = 2
OSCILLATING = 3
PATCH = 4

TWO_PI = 2.0 * np.pi

OK = 0
NEGATIVE = 1
OVERSHOOT = 2
FRONT_COLLAPSE = 3
CFL = 4


@njit(cache=True)
def _smoothstep(z):
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    return z * z * (3.0 - 2.0 * z)


@njit(cache=True)
def _plateau(x, lo, hi, w):
    # 1 on [lo, hi], C1 ramps of width w outside, 0 beyond
    if lo <= x <= hi:
        return 1.0
    if x < lo:
        return _smoothstep((x - (lo - w)) / w)
    return _smoothstep((hi + w - x) / w)


@njit(cache=True)
def _band_weight(x, x1, q, k, ramp):
    if x <= 0.0:
        n = 0
    else:
        n = int(np.floor(np.log(x / x1) / np.log(q)))
        if n < 0:
            n = 0
    best = 0.0
    for j in range(max(n - 1, 0), n + 2):
        lo = x1 * q ** j
        hi = k * lo
        v = _plateau(x, lo, hi, ramp * (hi - lo))
        if v > best:
            best = v
    return best


@njit(cache=True)
def coef_value(kind, p, t, x):
    T = p[0]
    if kind == CONSTANT:
        return p[1]
    if kind == SINUSOID:
        return p[1] + p[2] * np.sin(TWO_PI * t / T + p[3])
    if kind == BANDED:
        # p = T, m0, m1, s_plus, gamma, rho, eps0, x1, q, k, ramp
        m = p[1] + p[2] * np.sin(TWO_PI * t / T)
        phi = _band_weight(x, p[7], p[8], p[9], p[10])
        s = -p[4] + (p[3] * (x + p[6]) ** p[5] + p[4]) * phi
        return m * s
    if kind == OSCILLATING:
        # p = T, a0, a1, c, omega, rho, eps0
        amp = p[1] + p[2] * np.sin(TWO_PI * t / T)
        return amp * (1.0 + p[3] * np.sin(p[4] * x)) * (x + p[6]) ** p[5]
    if kind == PATCH:
        # p = T, m0, m1, s_plus, gamma, center, halfwidth, ramp
        m = p[1] + p[2] * np.sin(TWO_PI * t / T)
        phi = _plateau(x, p[5] - p[6], p[5] + p[6], p[7] * 2.0 * p[6])
        return m * (-p[4] + (p[3] + p[4]) * phi)
    return np.nan


@njit(cache=True)
def coef_fill(kind, p, t, xs, out):
    for i in range(xs.shape[0]):
        out[i] = coef_value(kind, p, t, xs[i])


@njit(cache=True)
def coef_pairs(kind, p, ts, xs):
    out = np.empty(ts.shape[0])
    for i in range(ts.shape[0]):
        out[i] = coef_value(kind, p, ts[i], xs[i])
    return out


@njit(cache=True)
def coef_table(kind, p, ts, xs):
    out = np.empty((ts.shape[0], xs.shape[0]))
    for k in range(ts.shape[0]):
        for i in range(xs.shape[0]):
            out[k, i] = coef_value(kind, p, ts[k], xs[i])
    return out


@njit(cache=True)
def logistic_substep(w, a, b, dt):
    """Exact solution of w' = a w - b w^2 over dt, node by node."""
    for i in range(w.shape[0]):
        wi = w[i]
        if wi == 0.0:
            continue
        ai = a[i]
        if abs(ai * dt) < 1e-10:
            w[i] = wi / (1.0 + b[i] * wi * dt)
        else:
            e = np.exp(-ai * dt)
            w[i] = wi * ai / (b[i] * wi + (ai - b[i] * wi) * e)


@njit(cache=True)
def thomas(lower, diag, upper, rhs, out):
    """Tridiagonal solve; lower[i] multiplies x[i-1], upper[i] multiplies x[i+1]."""
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / m
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / m
    out[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]


@njit(cache=True)
def thomas_factor(lower, diag, upper):
    n = diag.shape[0]
    cp = np.empty(n)
    piv = np.empty(n)
    piv[0] = diag[0]
    cp[0] = upper[0] / diag[0]
    for i in range(1, n):
        piv[i] = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / piv[i]
    return cp, piv


@njit(cache=True)
def thomas_apply(lower, cp, piv, rhs):
    """In-place solve with a factorization from thomas_factor."""
    n = piv.shape[0]
    rhs[0] = rhs[0] / piv[0]
    for i in range(1, n):
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / piv[i]
    for i in range(n - 2, -1, -1):
        rhs[i] = rhs[i] - cp[i] * rhs[i + 1]


@njit(cache=True)
def thomas_apply_columns(lower, cp, piv, Y):
    n, m = Y.shape
    inv = 1.0 / piv[0]
    for j in range(m):
        Y[0, j] *= inv
    for i in range(1, n):
        inv = 1.0 / piv[i]
        li = lower[i]
        for j in range(m):
            Y[i, j] = (Y[i, j] - li * Y[i - 1, j]) * inv
    for i in range(n - 2, -1, -1):
        ci = cp[i]
        for j in range(m):
            Y[i, j] -= ci * Y[i + 1, j]


@njit(cache=True)
def diffusion_matrix(n_unknown, r, ghost, left_dirichlet):
    """Backward-Euler diffusion rows on unknown nodes.

    r = d*dt/dx^2; ghost = 2*dx*alpha/beta (Robin ghost node elimination).
    With left_dirichlet the first unknown is node 1 and node 0 is pinned to 0.
    """
    lower = np.full(n_unknown, -r)
    upper = np.full(n_unknown, -r)
    diag = np.full(n_unknown, 1.0 + 2.0 * r)
    lower[0] = 0.0
    upper[n_unknown - 1] = 0.0
    if not left_dirichlet:
        diag[0] = 1.0 + 2.0 * r + r * ghost
        upper[0] = -2.0 * r
    return lower, diag, upper


@njit(cache=True)
def _trapz(f, dy):
    n = f.shape[0]
    s = 0.5 * (f[0] + f[n - 1])
    for i in range(1, n - 1):
        s += f[i]
    return s * dy


@njit(cache=True)
def _reaction_density(w, a, b, out):
    for i in range(w.shape[0]):
        out[i] = a[i] * w[i] - b[i] * w[i] * w[i]


@njit(cache=True)
def fbp_march(w, h, t, nsteps, dt, d, mu, alpha, beta,
              akind, ap, bkind, bp, wcap, tol_neg, tol_front):
    """Advance the front-fixed problem nsteps steps in place.

    w holds nodes y_0..y_N with w[N] = 0. Returns
    (h, t, hprime, reaction_integral, wmin, status).
    """
    N = w.shape[0] - 1
    dy = 1.0 / N
    y = np.empty(N + 1)
    for i in range(N + 1):
        y[i] = i * dy
    left_dirichlet = beta == 0.0
    i0 = 1 if left_dirichlet else 0
    n_unknown = N - i0

    x = np.empty(N + 1)
    a = np.empty(N + 1)
    b = np.empty(N + 1)
    f = np.empty(N + 1)
    adv = np.empty(N + 1)
    sol = np.empty(n_unknown)
    rhs = np.empty(n_unknown)

    hprime = mu * (4.0 * w[N - 1] - w[N - 2]) / (2.0 * dy * h)

    # reaction integral at the starting state (trapezoid in time)
    for i in range(N + 1):
        x[i] = h * y[i]
    coef_fill(akind, ap, t, x, a)
    coef_fill(bkind, bp, t, x, b)
    _reaction_density(w, a, b, f)
    f_old = h * _trapz(f, dy)
    integral = 0.0
    wmin = 0.0

    for step in range(nsteps):
        hprime = mu * (4.0 * w[N - 1] - w[N - 2]) / (2.0 * dy * h)
        if hprime < -tol_front:
            return h, t, hprime, integral, wmin, FRONT_COLLAPSE
        h_new = h + dt * hprime
        h_mid = 0.5 * (h + h_new)
        t_mid = t + 0.5 * dt

        for i in range(N + 1):
            x[i] = h_mid * y[i]
        coef_fill(akind, ap, t_mid, x, a)
        coef_fill(bkind, bp, t_mid, x, b)
        logistic_substep(w, a, b, dt)

        # explicit upwind for the front-induced drift xi*w_y, xi = y h'/h >= 0
        c0 = dt * hprime / (h_mid * dy)
        if c0 > 1.0:
            return h, t, hprime, integral, wmin, CFL
        for i in range(N):
            adv[i] = w[i] + c0 * y[i] * (w[i + 1] - w[i])
        adv[N] = 0.0

        dx = h_new * dy
        r = d * dt / (dx * dx)
        ghost = 0.0 if left_dirichlet else 2.0 * dx * alpha / beta
        lower, diag, upper = diffusion_matrix(n_unknown, r, ghost, left_dirichlet)
        for j in range(n_unknown):
            rhs[j] = adv[i0 + j]
        thomas(lower, diag, upper, rhs, sol)
        for j in range(n_unknown):
            w[i0 + j] = sol[j]
        if left_dirichlet:
            w[0] = 0.0
        w[N] = 0.0

        h = h_new
        t = t + dt

        for i in range(N + 1):
            x[i] = h * y[i]
        coef_fill(akind, ap, t, x, a)
        coef_fill(bkind, bp, t, x, b)
        _reaction_density(w, a, b, f)
        f_new = h * _trapz(f, dy)
        integral += 0.5 * dt * (f_old + f_new)
        f_old = f_new

        lo = w.min()
        if lo < wmin:
            wmin = lo
        if lo < -tol_neg:
            return h, t, hprime, integral, wmin, NEGATIVE
        if w.max() > wcap:
            return h, t, hprime, integral, wmin, OVERSHOOT

    hprime = mu * (4.0 * w[N - 1] - w[N - 2]) / (2.0 * dy * h)
    return h, t, hprime, integral, wmin, OK


@njit(cache=True)
def propagate_columns(Y, growth, lower, cp, piv):
    """Apply nt linear steps (pointwise growth, then implicit diffusion) to Y's columns.

    growth[k, i] = exp(a * dt) at step k, unknown node i.
    """
    nt = growth.shape[0]
    n = Y.shape[0]
    for k in range(nt):
        for i in range(n):
            g = growth[k, i]
            for j in range(Y.shape[1]):
                Y[i, j] *= g
        thomas_apply_columns(lower, cp, piv, Y)


@njit(cache=True)
def propagate_vector(v, growth, lower, cp, piv, record):
    """Same as propagate_columns for one vector; optionally store every step."""
    nt = growth.shape[0]
    n = v.shape[0]
    for i in range(n):
        record[0, i] = v[i]
    for k in range(nt):
        for i in range(n):
            v[i] *= growth[k, i]
        thomas_apply(lower, cp, piv, v)
        for i in range(n):
            record[k + 1, i] = v[i]


@njit(cache=True)
def logistic_period(w, a_tab, b_tab, dt, lower, cp, piv, i0, r, theta, record):
    """One period of the split logistic scheme on a fixed grid.

    w covers all nodes 0..N; node N carries the Dirichlet value theta.
    record receives nt+1 snapshots.
    """
    nt = a_tab.shape[0]
    N = w.shape[0] - 1
    n_unknown = N - i0
    rhs = np.empty(n_unknown)
    for i in range(N + 1):
        record[0, i] = w[i]
    for k in range(nt):
        logistic_substep(w, a_tab[k], b_tab[k], dt)
        for j in range(n_unknown):
            rhs[j] = w[i0 + j]
        rhs[n_unknown - 1] += r * theta
        thomas_apply(lower, cp, piv, rhs)
        for j in range(n_unknown):
            w[i0 + j] = rhs[j]
        if i0 == 1:
            w[0] = 0.0
        w[N] = theta
        for i in range(N + 1):
            record[k + 1, i] = w[i]


@njit(cache=True)
def semiwave_period(w, p_tab, q_tab, k_tab, v_tab, dt, dx, d, record, slope):
    """One period of w_t - d w_xx + k(t) w_x = p w - q w^2 with w(0)=0, w(L)=v(t).

    Linearly implicit reaction and centred advection, all inside one
    tridiagonal solve per step. slope[k] receives w_x(t_k, 0).
    """
    nt = p_tab.shape[0]
    N = w.shape[0] - 1
    n = N - 1
    lower = np.empty(n)
    diag = np.empty(n)
    upper = np.empty(n)
    rhs = np.empty(n)
    sol = np.empty(n)
    r = d * dt / (dx * dx)
    for i in range(N + 1):
        record[0, i] = w[i]
    slope[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx)
    for k in range(nt):
        c = k_tab[k] * dt / (2.0 * dx)
        for j in range(n):
            i = j + 1
            lower[j] = -r - c
            upper[j] = -r + c
            diag[j] = 1.0 + 2.0 * r - dt * p_tab[k] + dt * q_tab[k] * w[i]
            rhs[j] = w[i]
        lower[0] = 0.0
        upper[n - 1] = 0.0
        vb = v_tab[k + 1]
        rhs[n - 1] += (r - c) * vb
        thomas(lower, diag, upper, rhs, sol)
        w[0] = 0.0
        for j in range(n):
            w[j + 1] = sol[j]
        w[N] = vb
        for i in range(N + 1):
            record[k + 1, i] = w[i]
        slope[k + 1] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * dx)
