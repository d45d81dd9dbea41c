"""Measured quantities: norms, total variation, Kruzkov entropy production,
Young-measure histograms and scaling fits."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._validation import DomainError, ValidationError
from .models import EntropyPair, FluxModel
from .solver import Trajectory, face_slopes


def lq_norm(state, q: float = 2.0) -> float:
    """(sum |u_j|^q h)^(1/q), or max |u_j| for ``q = inf``."""
    q = float(q)
    if not q >= 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    u = np.asarray(state.u)
    if np.isinf(q):
        return float(np.max(np.abs(u)))
    return float(np.sum(np.abs(u) ** q) * state.grid.h) ** (1.0 / q)


def total_variation(state) -> float:
    """sum_j |u_{j+1} - u_j| with periodic wrap."""
    u = np.asarray(state.u if hasattr(state, "u") else state)
    return float(np.sum(np.abs(np.roll(u, -1) - u)))


def restrict(u_fine: np.ndarray, ratio: int) -> np.ndarray:
    """Conservative average of periodic nodal data onto every ``ratio``-th node."""
    u_fine = np.asarray(u_fine, dtype=float)
    if ratio == 1:
        return u_fine.copy()
    if ratio % 2:
        offsets = np.arange(-(ratio // 2), ratio // 2 + 1)
        weights = np.ones(ratio)
    else:
        offsets = np.arange(-(ratio // 2), ratio // 2 + 1)
        weights = np.ones(ratio + 1)
        weights[0] = weights[-1] = 0.5
    total = sum(w * np.roll(u_fine, -o) for o, w in zip(offsets, weights))
    return total[::ratio] / ratio


def l1_distance(a, b, time_tol: Optional[float] = None) -> float:
    """sum |a_j - b(x_j)| h on ``a``'s grid, with ``b`` averaged onto it if finer."""
    if not a.grid.same_domain(b.grid):
        raise DomainError("states live on different domains")
    if time_tol is not None and abs(a.t - b.t) > time_tol:
        raise DomainError(f"state times differ: {a.t} vs {b.t}")
    na, nb = a.grid.cells, b.grid.cells
    if nb % na:
        raise DomainError(f"grid of b ({nb} cells) is not an integer refinement of a ({na} cells)")
    ub = restrict(b.u, nb // na)
    return float(np.sum(np.abs(np.asarray(a.u) - ub)) * a.grid.h)


# ---------------------------------------------------------------------------
# Kruzkov entropy production

@dataclass(frozen=True)
class EntropyProductionReport:
    k_grid: np.ndarray
    production: np.ndarray

    @property
    def aggregate(self) -> float:
        return float(np.max(self.production)) if self.production.size else 0.0

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "production"])
            for k, p in zip(self.k_grid, self.production):
                writer.writerow([f"{k:.17g}", f"{p:.17g}"])
        return path


def default_k_grid(u0, count: int = 33, margin: float = 0.1) -> np.ndarray:
    u0 = np.asarray(u0)
    return np.linspace(float(np.min(u0)) - margin, float(np.max(u0)) + margin, count)


def _hat_matrix(nodes, centers, width, period=None):
    d = nodes[None, :] - centers[:, None]
    if period is not None:
        d = (d + 0.5 * period) % period - 0.5 * period
    return np.clip(1.0 - np.abs(d) / width, 0.0, None)


def _window_states(traj, window):
    states = traj.with_initial()
    x_lo, x_hi, t_lo, t_hi = window
    picked = [s for s in states if t_lo - 1e-12 <= s.t <= t_hi + 1e-12]
    return picked


def _resolve_window(traj, window):
    grid = traj.initial.grid
    states = traj.with_initial()
    if window is None:
        window = (grid.x_left, grid.x_right, states[0].t, states[-1].t)
    x_lo, x_hi, t_lo, t_hi = (float(v) for v in window)
    if not (x_hi > x_lo and t_hi > t_lo):
        raise ValidationError(f"degenerate window {window}")
    return x_lo, x_hi, t_lo, t_hi


def entropy_production(traj: Trajectory, flux: Optional[FluxModel] = None,
                       k_grid: Optional[Sequence[float]] = None,
                       test_resolution: tuple = (6, 4),
                       window: Optional[tuple] = None) -> EntropyProductionReport:
    """Largest normalised violation of the Kruzkov inequalities over hat test functions.

    For every k and every tensor-product hat phi >= 0 on a lattice of
    ``test_resolution = (M_x, M_t)`` cells,
    A(k, phi) = int int |u-k| phi_t + Q_k(u) phi_x dx dt, and
    P+(k) = max(0, max_phi(-A(k, phi) / ||phi||_1)).
    Time integrals use the trapezoid rule on the snapshot sequence (initial
    state included), written in summation-by-parts form so constants give
    exactly zero.

    The default lattice is coarse on purpose: the hats must stay wider than
    the viscous shock layers of the runs being compared, otherwise each hat
    resolves the layer and the measured production stops shrinking with the
    viscosity.
    """
    flux = flux or traj.flux
    x_lo, x_hi, t_lo, t_hi = _resolve_window(traj, window)
    states = _window_states(traj, (x_lo, x_hi, t_lo, t_hi))
    if len(states) < 3:
        raise ValidationError("entropy production needs at least 3 snapshots in the window")
    m_x, m_t = (int(v) for v in test_resolution)
    if m_x < 2 or m_t < 2:
        raise ValidationError("test_resolution needs at least 2 cells per direction")
    grid = traj.initial.grid
    h = grid.h
    x = grid.x
    t = np.array([s.t for s in states])
    U = np.stack([np.asarray(s.u) for s in states])

    full_x = np.isclose(x_lo, grid.x_left) and np.isclose(x_hi, grid.x_right)
    dx_hat = (x_hi - x_lo) / m_x
    if full_x:
        X = _hat_matrix(x, x_lo + dx_hat * np.arange(m_x), dx_hat, period=grid.length)
    else:
        X = _hat_matrix(x, x_lo + dx_hat * np.arange(1, m_x), dx_hat)
    # centred difference of the sampled hat keeps sum_j DX_j = 0 exactly
    DX = (np.roll(X, -1, axis=1) - np.roll(X, 1, axis=1)) / (2.0 * h)
    dt_hat = (t_hi - t_lo) / m_t
    Tm = _hat_matrix(t, t_lo + dt_hat * np.arange(1, m_t), dt_hat)
    dT = np.diff(Tm, axis=1)
    w = np.zeros_like(t)
    gaps = np.diff(t)
    w[:-1] += 0.5 * gaps
    w[1:] += 0.5 * gaps
    Tw = Tm * w[None, :]
    norms = (Tw.sum(axis=1)[:, None] * (X.sum(axis=1) * h)[None, :])

    ks = default_k_grid(traj.initial.u) if k_grid is None else np.asarray(k_grid, dtype=float)
    production = np.empty(ks.shape)
    fu = flux.f(U)
    for i, k in enumerate(ks):
        pair = EntropyPair(float(k))
        eta = pair.eta(U)
        q = np.sign(U - k) * (fu - float(flux.f(k)))
        eta_mid = 0.5 * (eta[1:] + eta[:-1])
        A = (dT @ eta_mid @ X.T + Tw @ q @ DX.T) * h
        production[i] = max(0.0, float(np.max(-A / norms)))
    return EntropyProductionReport(ks, production)


def entropy_scale(u0, flux: FluxModel, k_grid: Optional[Sequence[float]] = None) -> float:
    """TV(u0) times the widest range of Q_k over the sampled values of u0."""
    u0 = np.asarray(u0)
    ks = default_k_grid(u0) if k_grid is None else np.asarray(k_grid)
    spans = [float(np.ptp(EntropyPair(float(k)).q(u0, flux))) for k in ks]
    return total_variation(u0) * max(spans)


# ---------------------------------------------------------------------------
# Young-measure surrogate

@dataclass(frozen=True)
class YoungHistogram:
    """Per macro-cell value histograms; ``mass`` has shape (M_x, M_t, B)."""

    x_edges: np.ndarray
    t_edges: np.ndarray
    bin_centers: np.ndarray
    mass: np.ndarray
    mean: np.ndarray
    variance: np.ndarray

    @property
    def value_range(self) -> float:
        return float(self.bin_centers[-1] - self.bin_centers[0])

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cell_x", "cell_t", "bin", "mass"])
            for (ix, it, ib), m in np.ndenumerate(self.mass):
                if m > 0:
                    writer.writerow([ix, it, ib, f"{m:.17g}"])
        return path


def young_histogram(traj: Trajectory, window: Optional[tuple] = None, M_x: int = 16,
                    M_t: int = 8, B: int = 64) -> YoungHistogram:
    """Bin every nodal sample of the window into M_x x M_t macro-cells.

    The B bins are centred on an even lattice from the smallest to the largest
    observed value, so the extreme values sit exactly on bin centres.
    """
    if B < 16:
        raise ValidationError(f"B must be >= 16, got {B}")
    x_lo, x_hi, t_lo, t_hi = _resolve_window(traj, window)
    states = _window_states(traj, (x_lo, x_hi, t_lo, t_hi))
    grid = traj.initial.grid
    x = grid.x
    in_x = (x >= x_lo - 1e-12) & (x <= x_hi + 1e-12)
    cx = np.minimum(((x[in_x] - x_lo) / (x_hi - x_lo) * M_x).astype(int), M_x - 1)
    values = np.stack([np.asarray(s.u)[in_x] for s in states])
    ts = np.array([s.t for s in states])
    ct = np.minimum(((ts - t_lo) / (t_hi - t_lo) * M_t).astype(int), M_t - 1)
    vmin, vmax = float(values.min()), float(values.max())
    width = (vmax - vmin) / (B - 1)
    if width > 0:
        bins = np.clip(np.rint((values - vmin) / width).astype(int), 0, B - 1)
    else:
        bins = np.zeros(values.shape, dtype=int)
    centers = vmin + width * np.arange(B)

    counts = np.zeros((M_x, M_t, B))
    cell_x = np.broadcast_to(cx[None, :], values.shape)
    cell_t = np.broadcast_to(ct[:, None], values.shape)
    np.add.at(counts, (cell_x.ravel(), cell_t.ravel(), bins.ravel()), 1.0)
    totals = counts.sum(axis=2)
    if np.any(totals == 0):
        ix, it = np.argwhere(totals == 0)[0]
        raise ValidationError(f"macro-cell ({ix}, {it}) holds no samples; use fewer cells")
    mass = counts / totals[:, :, None]
    mean = mass @ centers
    variance = np.clip(mass @ centers ** 2 - mean ** 2, 0.0, None)
    return YoungHistogram(
        x_edges=np.linspace(x_lo, x_hi, M_x + 1),
        t_edges=np.linspace(t_lo, t_hi, M_t + 1),
        bin_centers=centers, mass=mass, mean=mean, variance=variance)


def concentration_metric(hist: YoungHistogram) -> float:
    """Mean per-cell standard deviation over the global value range (0 for Dirac cells)."""
    span = hist.value_range
    if span == 0:
        return 0.0
    dirac = np.count_nonzero(hist.mass, axis=2) == 1
    std = np.where(dirac, 0.0, np.sqrt(hist.variance))
    return float(np.mean(std) / span)


# ---------------------------------------------------------------------------
# scaling fits

def power_law_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValidationError("power-law fit needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def sup_scaling_fit(runs: Sequence[tuple]) -> float:
    """Slope of log(sup|u|) against log(1/delta) over ``(delta, sup)`` pairs."""
    runs = list(runs)
    if len(runs) < 3:
        raise ValidationError(f"sup scaling fit needs at least 3 runs, got {len(runs)}")
    delta = np.array([r[0] for r in runs], dtype=float)
    sup = np.array([r[1] for r in runs], dtype=float)
    if delta.max() / delta.min() < 10.0 * (1 - 1e-12):
        raise ValidationError("runs must span at least one decade in delta")
    return power_law_slope(1.0 / delta, sup)


def derivative_bound_quantity(traj: Trajectory, index: int = -1) -> float:
    """1/2 int u_x^2(T) + eps int_0^T int u_xx^2 beta'(u_x)."""
    state = traj.snapshots[index] if traj.snapshots else traj.initial
    lam = face_slopes(np.asarray(state.u), state.grid.h)
    parab = traj.parabolic_at[index] if traj.snapshots else 0.0
    return 0.5 * float(np.sum(lam * lam) * state.grid.h) + traj.params.epsilon * parab
