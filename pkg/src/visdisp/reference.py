"""Entropy-solution reference for u_t + f(u)_x = 0.

A first-order Godunov scheme on the periodic grid, and closed-form Riemann
solutions for convex fluxes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._validation import DomainError, ValidationError, check_finite_scalar
from .models import FluxModel
from .solver import Grid1D, SimState

SCHEMES = ("godunov", "exact-riemann")


@dataclass(frozen=True)
class RiemannData:
    u_left: float
    u_right: float

    def __post_init__(self):
        check_finite_scalar(self.u_left, "u_left")
        check_finite_scalar(self.u_right, "u_right")


@dataclass(frozen=True, eq=False)
class ReferenceSolution:
    grid: Grid1D
    u: np.ndarray
    t: float
    scheme: str = "godunov"
    steps: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.scheme!r}")
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def as_state(self) -> SimState:
        return SimState(self.grid, self.u, self.t)


# ---------------------------------------------------------------------------
# Godunov

_SAMPLES = 65
_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


def _extremum(a, b, flux, sign):
    """Vectorised max of ``sign * f`` over ``[a, b]`` (``a <= b``)."""
    s = np.linspace(0.0, 1.0, _SAMPLES)
    pts = a[:, None] + (b - a)[:, None] * s[None, :]
    vals = sign * flux.f(pts)
    idx = np.argmax(vals, axis=1)
    best = vals[np.arange(len(a)), idx]
    step = (b - a) / (_SAMPLES - 1)
    lo = np.maximum(a, pts[np.arange(len(a)), idx] - step)
    hi = np.minimum(b, pts[np.arange(len(a)), idx] + step)
    # golden-section refinement inside the bracketing sample cells
    for _ in range(40):
        c = hi - _GOLDEN * (hi - lo)
        d = lo + _GOLDEN * (hi - lo)
        left_better = sign * flux.f(c) > sign * flux.f(d)
        hi = np.where(left_better, d, hi)
        lo = np.where(left_better, lo, c)
    refined = sign * flux.f(0.5 * (lo + hi))
    ends = np.maximum(sign * flux.f(a), sign * flux.f(b))
    return sign * np.maximum(np.maximum(best, refined), ends)


def godunov_flux(u_left, u_right, flux: FluxModel):
    """Godunov interface flux: min of f on [uL, uR] if uL <= uR, else max on [uR, uL]."""
    ul = np.asarray(u_left, dtype=float)
    ur = np.asarray(u_right, dtype=float)
    scalar = ul.ndim == 0 and ur.ndim == 0
    ul, ur = np.broadcast_arrays(np.atleast_1d(ul), np.atleast_1d(ur))
    if flux.kind == "zero":
        out = np.zeros(ul.shape)
    elif flux.convex_minimum is not None:
        c = flux.convex_minimum
        out = np.maximum(flux.f(np.maximum(ul, c)), flux.f(np.minimum(ur, c)))
    else:
        out = np.empty(ul.shape)
        rising = ul <= ur
        if np.any(rising):
            out[rising] = _extremum(ul[rising], ur[rising], flux, -1.0)
        if np.any(~rising):
            out[~rising] = _extremum(ur[~rising], ul[~rising], flux, 1.0)
    return float(out[0]) if scalar else out


def _godunov_step(u, dt, h, flux):
    face = godunov_flux(u, np.roll(u, -1), flux)
    return u - dt / h * (face - np.roll(face, 1))


def _max_speed(u, flux, lo=None, hi=None):
    if flux.kind == "zero":
        return 0.0
    lo = float(np.min(u)) if lo is None else lo
    hi = float(np.max(u)) if hi is None else hi
    probe = np.linspace(lo, hi, 257) if hi > lo else np.array([lo])
    return float(np.max(np.abs(flux.df(probe))))


def godunov_integrate(initial: SimState, T: float, flux: FluxModel, cfl: float = 0.9,
                      record: bool = False, n_steps: Optional[int] = None):
    """Evolve ``initial`` with the Godunov scheme.

    The step is ``cfl * h / max|f'|`` with the speed taken over the initial
    range, which the monotone scheme never leaves. With ``n_steps`` the run
    stops after that many steps instead of at ``T``. With ``record=True`` a
    list of every intermediate ``ReferenceSolution`` is returned.
    """
    if not 0 < cfl <= 1:
        raise ValidationError(f"cfl must lie in (0, 1], got {cfl}")
    h = initial.grid.h
    u = np.array(initial.u, dtype=float)
    t = initial.t
    speed = _max_speed(u, flux)
    history = [ReferenceSolution(initial.grid, u, t)] if record else None
    if n_steps is None:
        T = check_finite_scalar(T, "T")
        if T < t:
            raise ValidationError(f"T={T} precedes the initial time {t}")
        if speed == 0.0:
            ref = ReferenceSolution(initial.grid, u, T)
            return [*history, ref] if record else ref
        dt_max = cfl * h / speed
        steps = 0
        tol = 1e-12 * max(abs(T), 1.0)
        while T - t > tol:
            dt = min(dt_max, T - t)
            u = _godunov_step(u, dt, h, flux)
            t = t + dt if T - (t + dt) > tol else T
            steps += 1
            if record:
                history.append(ReferenceSolution(initial.grid, u, t, steps=steps))
    else:
        dt = cfl * h / speed if speed > 0 else 1.0
        for steps in range(1, int(n_steps) + 1):
            u = _godunov_step(u, dt, h, flux)
            t += dt
            if record:
                history.append(ReferenceSolution(initial.grid, u, t, steps=steps))
        steps = int(n_steps)
    if record:
        return history
    return ReferenceSolution(initial.grid, u, t, steps=steps)


# ---------------------------------------------------------------------------
# exact Riemann solutions

def riemann_exact(data: RiemannData, flux: FluxModel, xi):
    """Self-similar entropy solution at ``xi = x/t`` for a convex flux.

    At ``xi`` equal to the shock speed the left state is returned.
    """
    ul, ur = float(data.u_left), float(data.u_right)
    lo, hi = min(ul, ur), max(ul, ur)
    if not flux.is_convex_on(lo, hi):
        raise DomainError(f"flux {flux.kind!r} is not convex on [{lo}, {hi}]; use godunov_integrate")
    xi_arr = np.asarray(xi, dtype=float)
    if ul == ur:
        out = np.full(xi_arr.shape, ul)
    elif ul > ur:
        s = (float(flux.f(ul)) - float(flux.f(ur))) / (ul - ur)
        out = np.where(xi_arr <= s, ul, ur)
    else:
        a, b = float(flux.df(ul)), float(flux.df(ur))
        fan = flux.df_inverse(np.clip(xi_arr, a, b), ul, ur)
        out = np.where(xi_arr <= a, ul, np.where(xi_arr >= b, ur, fan))
    return float(out) if out.ndim == 0 else out


def wave_speeds(data: RiemannData, flux: FluxModel) -> tuple[float, float]:
    """Slowest and fastest signal speeds of the Riemann fan."""
    ul, ur = float(data.u_left), float(data.u_right)
    if ul > ur:
        s = (float(flux.f(ul)) - float(flux.f(ur))) / (ul - ur)
        return s, s
    if ul < ur:
        return float(flux.df(ul)), float(flux.df(ur))
    return 0.0, 0.0


def riemann_periodic_profile(grid: Grid1D, data: RiemannData, flux: FluxModel, t: float,
                             x0: Optional[float] = None) -> ReferenceSolution:
    """Exact solution on the periodic grid for step data.

    The data are ``u_left`` on ``[x_left, x0)`` and ``u_right`` on
    ``[x0, x_right)``, so there are two Riemann problems: at ``x0`` and at the
    seam. Valid until the two fans meet, which is rejected.
    """
    x0 = 0.5 * (grid.x_left + grid.x_right) if x0 is None else float(x0)
    L = grid.length
    x = grid.x
    if t <= 0:
        u = np.where(x < x0, data.u_left, data.u_right)
        return ReferenceSolution(grid, u, 0.0, scheme="exact-riemann")
    seam = RiemannData(data.u_right, data.u_left)
    a1, b1 = wave_speeds(data, flux)
    a2, b2 = wave_speeds(seam, flux)
    d_left = x0 - grid.x_left
    d_right = grid.x_right - x0
    # coordinates relative to x0; the seam sits at +d_right == -d_left
    if not (b1 * t < d_right + a2 * t and b2 * t - d_left < a1 * t):
        raise ValidationError(f"Riemann fans interact before t={t}; enlarge the domain")
    split_right = 0.5 * (b1 * t + d_right + a2 * t)
    split_left = 0.5 * (b2 * t - d_left + a1 * t)
    rho = (x - x0 - split_left) % L
    r1 = split_left + rho
    first = rho < split_right - split_left
    u = np.where(first, riemann_exact(data, flux, r1 / t),
                 riemann_exact(seam, flux, (r1 - d_right) / t))
    return ReferenceSolution(grid, np.asarray(u, dtype=float), t, scheme="exact-riemann")


def norm_contraction_check(states: Sequence, r: float = 1.0, rtol: float = 1e-12) -> bool:
    """True iff the L^r norm never grows by more than ``rtol * ||u_0||`` between consecutive states."""
    if len(states) < 2:
        raise ValidationError("norm contraction check needs at least two states")
    if r < 1:
        raise ValidationError(f"r must be >= 1, got {r}")
    norms = [_lr(s, r) for s in states]
    slack = rtol * norms[0]
    return all(b <= a + slack for a, b in zip(norms, norms[1:]))


def _lr(state, r):
    u = np.asarray(state.u)
    h = state.grid.h
    if np.isinf(r):
        return float(np.max(np.abs(u)))
    return float(np.sum(np.abs(u) ** r) * h) ** (1.0 / r)


def reference_for(state: SimState, T: float, flux: FluxModel, factor: int = 4,
                  cfl: float = 0.9) -> ReferenceSolution:
    """Godunov reference on a grid ``factor`` times finer than ``state``'s.

    The fine initial data are the linear interpolant of the coarse nodal data.
    """
    fine = state.grid.refined(factor)
    xs = np.append(state.grid.x, state.grid.x_right)
    us = np.append(np.asarray(state.u), state.u[0])
    u_fine = np.interp(fine.x, xs, us)
    return godunov_integrate(SimState(fine, u_fine, state.t), T, flux, cfl=cfl)
