"""Fused numba kernels for the closed-form flux/viscosity kinds.

The numpy stencils in ``solver`` remain the reference path (and the only one
for tabulated models); these kernels evaluate the same formulas node by node.
"""

from __future__ import annotations

import numpy as np
from numba import njit

FLUX_CODES = {"zero": 0, "burgers": 1, "power": 2}
VISC_CODES = {"linear": 0, "vonneumann": 1, "power": 2}


def codes_for(flux, visc):
    """Integer codes for the kernels, or None when a model is tabulated."""
    if flux.kind not in FLUX_CODES or visc.kind not in VISC_CODES:
        return None
    vcode = VISC_CODES[visc.kind]
    if vcode == 2 and visc.r == 1.0:
        vcode = 1
    return FLUX_CODES[flux.kind], float(flux.m), vcode, float(visc.exponent)


@njit(cache=True, inline="always")
def _f(u, fcode, m):
    if fcode == 1:
        return 0.5 * u * u
    if fcode == 2:
        return abs(u) ** m / m
    return 0.0


@njit(cache=True, inline="always")
def _df(u, fcode, m):
    if fcode == 1:
        return u
    if fcode == 2:
        return u * abs(u) ** (m - 2.0)
    return 0.0


@njit(cache=True, inline="always")
def _beta(lam, vcode, vexp):
    if vcode == 0:
        return lam
    if vcode == 1:
        return abs(lam) * lam
    return abs(lam) ** vexp * lam


@njit(cache=True, inline="always")
def _dbeta(lam, vcode, vexp):
    if vcode == 0:
        return 1.0
    if vcode == 1:
        return 2.0 * abs(lam)
    return (vexp + 1.0) * abs(lam) ** vexp


@njit(cache=True)
def rhs(u, h, eps, delta, fcode, m, vcode, vexp, out):
    n = u.shape[0]
    inv2h = 0.5 / h
    invh = 1.0 / h
    c3 = delta / (2.0 * h * h * h)
    for j in range(n):
        jm2 = j - 2 if j >= 2 else j - 2 + n
        jm1 = j - 1 if j >= 1 else n - 1
        jp1 = j + 1 if j + 1 < n else 0
        jp2 = j + 2 if j + 2 < n else j + 2 - n
        val = 0.0
        if fcode != 0:
            val -= (_f(u[jp1], fcode, m) - _f(u[jm1], fcode, m)) * inv2h
        if eps > 0.0:
            bp = _beta((u[jp1] - u[j]) * invh, vcode, vexp)
            bm = _beta((u[j] - u[jm1]) * invh, vcode, vexp)
            val += eps * (bp - bm) * invh
        if delta > 0.0:
            val -= c3 * (u[jp2] - 2.0 * u[jp1] + 2.0 * u[jm1] - u[jm2])
        out[j] = val


@njit(cache=True)
def ssprk3_step(u, dt, h, eps, delta, fcode, m, vcode, vexp, k, u1, u2, unew):
    n = u.shape[0]
    rhs(u, h, eps, delta, fcode, m, vcode, vexp, k)
    for j in range(n):
        u1[j] = u[j] + dt * k[j]
    rhs(u1, h, eps, delta, fcode, m, vcode, vexp, k)
    for j in range(n):
        u2[j] = 0.75 * u[j] + 0.25 * (u1[j] + dt * k[j])
    rhs(u2, h, eps, delta, fcode, m, vcode, vexp, k)
    finite = True
    for j in range(n):
        v = (u[j] + 2.0 * (u2[j] + dt * k[j])) / 3.0
        unew[j] = v
        if not np.isfinite(v):
            finite = False
    return finite


@njit(cache=True)
def stable_dt(u, h, eps, delta, fcode, m, vcode, vexp, safety, fallback):
    n = u.shape[0]
    speed = 0.0
    diff = 0.0
    for j in range(n):
        jp1 = j + 1 if j + 1 < n else 0
        if fcode != 0:
            s = abs(_df(u[j], fcode, m))
            if s > speed:
                speed = s
        if eps > 0.0:
            d = _dbeta((u[jp1] - u[j]) / h, vcode, vexp)
            if d > diff:
                diff = d
    best = np.inf
    if speed > 0.0:
        best = min(best, h / speed)
    if eps > 0.0 and diff > 0.0:
        best = min(best, h * h / (2.0 * eps * diff))
    if delta > 0.0:
        best = min(best, h * h * h / (4.0 * delta))
    if best == np.inf:
        return fallback
    return safety * best


@njit(cache=True)
def densities(u, v, h, fcode, m, vcode, vexp):
    """Dissipation integrands at the midpoint state (u + v)/2.

    Returns (sum beta(l) l h, sum dl db / h, sum f'(umid) beta(l) l h).
    """
    n = u.shape[0]
    diss = 0.0
    parab = 0.0
    fdiss = 0.0
    lam_prev = ((0.5 * (u[0] + v[0])) - 0.5 * (u[n - 1] + v[n - 1])) / h
    b_prev = _beta(lam_prev, vcode, vexp)
    for j in range(n):
        jp1 = j + 1 if j + 1 < n else 0
        a = 0.5 * (u[j] + v[j])
        b = 0.5 * (u[jp1] + v[jp1])
        lam = (b - a) / h
        bl = _beta(lam, vcode, vexp)
        diss += bl * lam
        parab += (lam - lam_prev) * (bl - b_prev)
        if fcode != 0:
            fdiss += _df(0.5 * (a + b), fcode, m) * bl * lam
        lam_prev = lam
        b_prev = bl
    return diss * h, parab / h, fdiss * h
