"""Method-of-lines solver for u_t + f(u)_x = eps (beta(u_x))_x - delta u_xxx.

Periodic nodal grid, second-order centred stencils in divergence form and
explicit SSP-RK3 stepping. ``integrate`` also accumulates the space-time
integrals that enter the two energy balances.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._validation import (
    DomainError,
    ValidationError,
    check_finite_array,
    check_finite_scalar,
    check_nonnegative,
)
from . import _kernels
from .models import FluxModel, ViscosityModel


@dataclass(frozen=True)
class Grid1D:
    x_left: float
    x_right: float
    cells: int

    def __post_init__(self):
        check_finite_scalar(self.x_left, "x_left")
        check_finite_scalar(self.x_right, "x_right")
        if not self.x_right > self.x_left:
            raise ValidationError("grid needs x_right > x_left")
        if int(self.cells) != self.cells or self.cells < 16:
            raise ValidationError(f"grid needs at least 16 cells, got {self.cells}")
        object.__setattr__(self, "cells", int(self.cells))

    @property
    def length(self) -> float:
        return self.x_right - self.x_left

    @property
    def h(self) -> float:
        return self.length / self.cells

    @property
    def x(self) -> np.ndarray:
        return self.x_left + self.h * np.arange(self.cells)

    def refined(self, factor: int) -> "Grid1D":
        return Grid1D(self.x_left, self.x_right, self.cells * int(factor))

    def same_domain(self, other: "Grid1D", rtol: float = 1e-12) -> bool:
        scale = max(abs(self.length), 1.0)
        return (abs(self.x_left - other.x_left) <= rtol * scale
                and abs(self.x_right - other.x_right) <= rtol * scale)


@dataclass(frozen=True)
class RegularizationParams:
    epsilon: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        check_nonnegative(self.epsilon, "epsilon")
        check_nonnegative(self.delta, "delta")


@dataclass(frozen=True, eq=False)
class SimState:
    grid: Grid1D
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        u = check_finite_array(self.u, "u").copy()
        if u.shape != (self.grid.cells,):
            raise ValidationError(f"u has shape {u.shape}, grid expects ({self.grid.cells},)")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        t = check_nonnegative(self.t, "t")
        object.__setattr__(self, "t", t)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @classmethod
    def from_function(cls, grid: Grid1D, func, t: float = 0.0) -> "SimState":
        return cls(grid, np.asarray(func(grid.x), dtype=float), t)


class BlowUpError(RuntimeError):
    """A non-finite value appeared during time stepping."""

    def __init__(self, time: float, node: int, trajectory: Optional["Trajectory"] = None):
        self.time = time
        self.node = node
        self.trajectory = trajectory
        super().__init__(f"non-finite value at node {node}, t={time:.6g}")


@dataclass
class Trajectory:
    """Snapshots of a run plus the accumulated dissipation integrals.

    ``dissipation`` is int_0^t int beta(u_x) u_x, ``parabolic_dissipation`` is
    int_0^t int u_xx^2 beta'(u_x) and ``flux_dissipation`` is
    int_0^t int f'(u) beta(u_x) u_x. The ``*_at`` lists hold the running values
    at each snapshot.
    """

    initial: SimState
    params: RegularizationParams
    flux: FluxModel
    visc: ViscosityModel
    snapshots: list = field(default_factory=list)
    dissipation: float = 0.0
    parabolic_dissipation: float = 0.0
    flux_dissipation: float = 0.0
    dissipation_at: list = field(default_factory=list)
    parabolic_at: list = field(default_factory=list)
    flux_dissipation_at: list = field(default_factory=list)
    steps: int = 0
    dt_max: float = 0.0
    dt_min: float = math.inf
    sup_norm: float = 0.0

    @property
    def final(self) -> SimState:
        return self.snapshots[-1] if self.snapshots else self.initial

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    def with_initial(self) -> list:
        return [self.initial, *self.snapshots]


# ---------------------------------------------------------------------------
# stencils

def face_slopes(u: np.ndarray, h: float) -> np.ndarray:
    """Slopes (u_{j+1} - u_j)/h on the faces j+1/2."""
    return (np.roll(u, -1) - u) / h


def third_difference(u: np.ndarray, h: float) -> np.ndarray:
    """Centred 5-point u_xxx."""
    return (np.roll(u, -2) - 2.0 * np.roll(u, -1) + 2.0 * np.roll(u, 1) - np.roll(u, 2)) / (2.0 * h ** 3)


def _rhs(u, h, params, flux, visc):
    out = np.zeros_like(u)
    if flux.kind != "zero":
        fu = flux.f(u)
        out -= (np.roll(fu, -1) - np.roll(fu, 1)) / (2.0 * h)
    if params.epsilon > 0:
        b = visc.beta(face_slopes(u, h))
        out += params.epsilon * (b - np.roll(b, 1)) / h
    if params.delta > 0:
        out -= params.delta * third_difference(u, h)
    return out


def _check_rhs(values, t):
    if not np.all(np.isfinite(values)):
        raise BlowUpError(t, int(np.flatnonzero(~np.isfinite(values))[0]))
    return values


def semidiscrete_rhs(state: SimState, params: RegularizationParams, flux: FluxModel,
                     visc: ViscosityModel) -> np.ndarray:
    """du/dt at every node."""
    with np.errstate(over="ignore", invalid="ignore"):
        values = _rhs(np.asarray(state.u), state.grid.h, params, flux, visc)
    return _check_rhs(values, state.t)


def stable_timestep(state: SimState, params: RegularizationParams, flux: FluxModel,
                    visc: ViscosityModel, safety: float = 0.5,
                    fallback: Optional[float] = None) -> float:
    """Explicit step bound ``safety * min(h/max|f'|, h^2/(2 eps max beta'), h^3/(4 delta))``.

    Inactive terms are dropped. With all three inactive ``fallback`` (the
    output-interval length) is returned.
    """
    if not 0 < safety <= 1:
        raise ValidationError(f"safety must lie in (0, 1], got {safety}")
    dt = _stable_dt(np.asarray(state.u), state.grid.h, params, flux, visc, safety, fallback)
    if dt is None:
        raise ValidationError("no active term bounds the step; pass the output interval as fallback")
    return float(dt)


def _ssprk3(u, dt, h, t, params, flux, visc):
    with np.errstate(over="ignore", invalid="ignore"):
        u1 = u + dt * _check_rhs(_rhs(u, h, params, flux, visc), t)
        u2 = 0.75 * u + 0.25 * (u1 + dt * _check_rhs(_rhs(u1, h, params, flux, visc), t + dt))
        u3 = (u + 2.0 * (u2 + dt * _check_rhs(_rhs(u2, h, params, flux, visc), t + 0.5 * dt))) / 3.0
    return _check_rhs(u3, t + dt)


def advance(state: SimState, dt: float, params: RegularizationParams, flux: FluxModel,
            visc: ViscosityModel) -> SimState:
    """One SSP-RK3 (Shu-Osher) step of size ``dt``."""
    dt = check_finite_scalar(dt, "dt")
    if dt <= 0:
        raise ValidationError("dt must be > 0")
    u = _ssprk3(np.asarray(state.u), dt, state.grid.h, state.t, params, flux, visc)
    return SimState(state.grid, u, state.t + dt)


# ---------------------------------------------------------------------------
# discrete integrands of the energy identities

def dissipation_density(u, h, visc) -> float:
    """sum_j beta(l_{j+1/2}) l_{j+1/2} h."""
    lam = face_slopes(u, h)
    return float(np.sum(visc.beta(lam) * lam) * h)


def parabolic_density(u, h, visc) -> float:
    """Discrete int u_xx^2 beta'(u_x).

    beta'(u_x) is the divided difference of beta across neighbouring faces, so
    every term is nonnegative whenever beta is non-decreasing.
    """
    lam = face_slopes(u, h)
    dlam = lam - np.roll(lam, 1)
    db = visc.beta(lam) - np.roll(visc.beta(lam), 1)
    return float(np.sum(dlam * db) / h)


def flux_dissipation_density(u, h, flux, visc) -> float:
    """Discrete int f'(u) beta(u_x) u_x with f' at face midpoints."""
    lam = face_slopes(u, h)
    umid = 0.5 * (u + np.roll(u, -1))
    return float(np.sum(flux.df(umid) * visc.beta(lam) * lam) * h)


def integrate(initial: SimState, T: float, params: RegularizationParams, flux: FluxModel,
              visc: ViscosityModel, snapshot_times: Sequence[float] = (),
              safety: float = 0.5, max_steps: int = 50_000_000) -> Trajectory:
    """Advance ``initial`` to time ``T``, recording snapshots at the requested times.

    Steps are shortened to land on snapshot times exactly; the final state at
    ``T`` is always recorded. The dissipation integrals use the midpoint rule
    in time, evaluated on the average of the states at both ends of a step;
    they are only accumulated when ``epsilon > 0`` (they enter every balance
    multiplied by epsilon).
    """
    T = check_finite_scalar(T, "T")
    if not T > initial.t:
        raise ValidationError(f"T={T} must exceed the initial time {initial.t}")
    times = sorted(float(s) for s in snapshot_times)
    for s in times:
        if not initial.t < s <= T:
            raise ValidationError(f"snapshot time {s} outside ({initial.t}, {T}]")
    if not times or times[-1] < T:
        times.append(T)
    # drop duplicates while keeping order
    targets = [s for i, s in enumerate(times) if i == 0 or s > times[i - 1]]

    traj = Trajectory(initial, params, flux, visc)
    grid = initial.grid
    stepper = _Stepper(grid.h, params, flux, visc, safety, T - initial.t)
    u = np.array(initial.u, dtype=float)
    t = initial.t
    traj.sup_norm = float(np.max(np.abs(u)))
    track = params.epsilon > 0
    tol = 1e-12 * max(abs(T), 1.0)

    for target in targets:
        while target - t > tol:
            if traj.steps >= max_steps:
                raise ValidationError(f"step budget of {max_steps} exhausted at t={t:.6g}")
            dt = stepper.dt(u)
            if t + dt >= target - tol:
                dt = target - t
            try:
                unew = stepper.step(u, dt, t)
            except BlowUpError as err:
                err.trajectory = traj
                raise
            if track:
                diss, parab, fdiss = stepper.densities(u, unew)
                traj.dissipation += dt * diss
                traj.parabolic_dissipation += dt * parab
                traj.flux_dissipation += dt * fdiss
            u = unew
            t = t + dt if target - (t + dt) > tol else target
            traj.steps += 1
            traj.dt_max = max(traj.dt_max, dt)
            traj.dt_min = min(traj.dt_min, dt)
            traj.sup_norm = max(traj.sup_norm, float(np.max(np.abs(u))))
        traj.snapshots.append(SimState(grid, u, target))
        traj.dissipation_at.append(traj.dissipation)
        traj.parabolic_at.append(traj.parabolic_dissipation)
        traj.flux_dissipation_at.append(traj.flux_dissipation)
    return traj


class _Stepper:
    """SSP-RK3 stepping through the fused kernels, or numpy for tabulated models."""

    def __init__(self, h, params, flux, visc, safety, fallback):
        self.h = h
        self.params = params
        self.flux = flux
        self.visc = visc
        self.safety = safety
        self.fallback = fallback
        self.codes = _kernels.codes_for(flux, visc)

    def dt(self, u):
        if self.codes is None:
            return _stable_dt(u, self.h, self.params, self.flux, self.visc, self.safety, self.fallback)
        return _kernels.stable_dt(u, self.h, self.params.epsilon, self.params.delta, *self.codes,
                                  self.safety, self.fallback)

    def step(self, u, dt, t):
        if self.codes is None:
            return _ssprk3(u, dt, self.h, t, self.params, self.flux, self.visc)
        k, u1, u2, unew = (np.empty_like(u) for _ in range(4))
        ok = _kernels.ssprk3_step(u, dt, self.h, self.params.epsilon, self.params.delta,
                                  *self.codes, k, u1, u2, unew)
        if not ok:
            raise BlowUpError(t + dt, int(np.flatnonzero(~np.isfinite(unew))[0]))
        return unew

    def densities(self, u, unew):
        if self.codes is None:
            umid = 0.5 * (u + unew)
            fdiss = 0.0
            if self.flux.kind != "zero":
                fdiss = flux_dissipation_density(umid, self.h, self.flux, self.visc)
            return (dissipation_density(umid, self.h, self.visc),
                    parabolic_density(umid, self.h, self.visc), fdiss)
        return _kernels.densities(u, unew, self.h, *self.codes)


def _stable_dt(u, h, params, flux, visc, safety, fallback):
    bounds = []
    if flux.kind != "zero":
        speed = float(np.max(np.abs(flux.df(u))))
        if speed > 0:
            bounds.append(h / speed)
    if params.epsilon > 0:
        diff = float(np.max(visc.dbeta(face_slopes(u, h))))
        if diff > 0:
            bounds.append(h * h / (2.0 * params.epsilon * diff))
    if params.delta > 0:
        bounds.append(h ** 3 / (4.0 * params.delta))
    if not bounds:
        return None if fallback is None else float(fallback)
    return safety * min(bounds)


# ---------------------------------------------------------------------------
# energy identities

def l2_squared(u, h) -> float:
    return float(np.sum(np.asarray(u) ** 2) * h)


def energy_balance(traj: Trajectory, index: int = -1) -> float:
    """Residual of int u^2(T) + 2 eps int_0^T int beta(u_x) u_x - int u_0^2."""
    h = traj.initial.grid.h
    if not traj.snapshots:
        return 0.0
    state = traj.snapshots[index]
    diss = traj.dissipation_at[index]
    return l2_squared(state.u, h) + 2.0 * traj.params.epsilon * diss - l2_squared(traj.initial.u, h)


def dispersive_invariant(u, h, flux: FluxModel, delta: float) -> float:
    """delta/2 int u_x^2 - int F(u)."""
    lam = face_slopes(np.asarray(u), h)
    return 0.5 * delta * float(np.sum(lam * lam) * h) - float(np.sum(flux.primitive(u)) * h)


def second_energy_balance(traj: Trajectory, flux: Optional[FluxModel] = None,
                          visc: Optional[ViscosityModel] = None,
                          params: Optional[RegularizationParams] = None,
                          index: int = -1) -> float:
    """Residual of the second energy balance (F-weighted KdV invariant).

    [delta/2 int u_x^2 - int F(u)]_0^T + eps delta int int u_xx^2 beta'(u_x)
    - eps int int f'(u) beta(u_x) u_x
    """
    flux = flux or traj.flux
    visc = visc or traj.visc
    params = params or traj.params
    if not traj.snapshots:
        return 0.0
    h = traj.initial.grid.h
    eps, delta = params.epsilon, params.delta
    state = traj.snapshots[index]
    change = (dispersive_invariant(state.u, h, flux, delta)
              - dispersive_invariant(traj.initial.u, h, flux, delta))
    return change + eps * delta * traj.parabolic_at[index] - eps * traj.flux_dissipation_at[index]


def mass(state: SimState) -> float:
    return float(np.sum(state.u) * state.grid.h)


# ---------------------------------------------------------------------------
# snapshot dump

def write_snapshot_csv(state, path) -> Path:
    """Write ``x,u`` columns with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = state.grid.x
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u"])
        for xi, ui in zip(x, np.asarray(state.u)):
            writer.writerow([f"{xi:.17g}", f"{ui:.17g}"])
    return path


def read_snapshot_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns x,u")
    return data[:, 0], data[:, 1]
