"""Experiment driver: configured runs, coupled (epsilon, delta) sweeps, regime
labels, CSV tables and SVG plots."""

from __future__ import annotations

import csv
import dataclasses
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import yaml

from ._validation import DomainError, ValidationError, check_finite_scalar
from .diagnostics import (concentration_metric, entropy_production, entropy_scale, l1_distance,
                          lq_norm, total_variation, young_histogram)
from .estimators import EntropyReference, RegularizedSolver
from .models import FluxModel, ViscosityModel
from .reference import (ReferenceSolution, RiemannData, godunov_integrate,
                        riemann_periodic_profile)
from .solver import (BlowUpError, Grid1D, RegularizationParams, SimState, Trajectory,
                     energy_balance, read_snapshot_csv, write_snapshot_csv)

CSV_COLUMNS = ("epsilon", "delta", "h", "dt", "l1_error", "l2_norm", "l5_norm", "linf",
               "tv_ratio", "energy_residual", "max_entropy_production", "concentration", "regime")
REGIMES = ("convergent", "oscillatory", "indeterminate")
THEOREMS = ("thm41", "thm42", "thm43", "free")
INITIAL_KINDS = ("riemann", "sine", "gaussian", "file")

# a Gaussian is below 1e-12 of its peak beyond this many widths
_GAUSS_REACH = math.sqrt(2.0 * math.log(1e12))
_PRODUCTION_FLOOR = 1e-12


class ResolutionError(ValidationError):
    """The grid is coarser than the resolution rule allows."""


class SweepError(RuntimeError):
    """A sweep member failed; ``partial`` holds the rows that finished."""

    def __init__(self, partial: "SweepResult", epsilon: float, cause: BaseException):
        self.partial = partial
        self.epsilon = epsilon
        self.cause = cause
        super().__init__(f"sweep member epsilon={epsilon:g} failed: {cause}")


# ---------------------------------------------------------------------------
# configuration

def flux_from_spec(spec) -> FluxModel:
    spec = dict(spec or {"kind": "burgers"})
    kind = spec.pop("kind", "burgers")
    if kind == "table":
        return FluxModel.from_table(spec.pop("u"), spec.pop("f"), **spec)
    return FluxModel(kind, **spec)


def viscosity_from_spec(spec) -> ViscosityModel:
    spec = dict(spec or {"kind": "vonneumann"})
    kind = spec.pop("kind", "vonneumann")
    if kind == "table":
        return ViscosityModel.from_table(spec.pop("lam"), spec.pop("beta"), **spec)
    return ViscosityModel(kind, **spec)


def _default_diagnostics():
    return {"reference": True, "entropy": True, "young": True, "snapshots_csv": True}


@dataclass
class ExperimentConfig:
    """One regularised run. Mapping-valued fields use the keys documented in the README."""

    flux: dict = field(default_factory=lambda: {"kind": "burgers"})
    viscosity: dict = field(default_factory=lambda: {"kind": "vonneumann"})
    initial: dict = field(default_factory=lambda: {"kind": "sine"})
    domain: dict = field(default_factory=dict)
    T: float = 1.0
    epsilon: float = 0.0
    delta: float = 0.0
    snapshots: Union[int, list] = 40
    diagnostics: dict = field(default_factory=_default_diagnostics)
    seed: int = 0
    output_dir: Optional[str] = None
    override_resolution: bool = False
    godunov_fallback: bool = False
    safety: float = 0.5
    reference_factor: int = 4
    entropy_lattice: tuple = (6, 4)
    young_cells: tuple = (16, 8, 64)
    q: float = 2.0
    workers: int = 1
    assumption_range: tuple = (-10.0, 10.0)
    assumption_samples: int = 10_000

    def __post_init__(self):
        self.T = check_finite_scalar(self.T, "T")
        if not self.T > 0:
            raise ValidationError(f"T must be > 0, got {self.T}")
        self.epsilon = check_finite_scalar(self.epsilon, "epsilon")
        self.delta = check_finite_scalar(self.delta, "delta")
        if self.epsilon < 0 or self.delta < 0:
            raise ValidationError("epsilon and delta must be >= 0")
        kind = self.initial.get("kind", "sine")
        if kind == "gaussian-bump":
            kind = "gaussian"
        if kind not in INITIAL_KINDS:
            raise ValidationError(f"unknown initial-data kind {kind!r}; expected one of {INITIAL_KINDS}")
        self.initial = {**self.initial, "kind": kind}
        if self.godunov_fallback and (self.epsilon or self.delta):
            raise ValidationError("godunov_fallback needs epsilon = delta = 0")
        diag = _default_diagnostics()
        diag.update(self.diagnostics or {})
        self.diagnostics = diag
        self.entropy_lattice = tuple(int(v) for v in self.entropy_lattice)
        self.young_cells = tuple(int(v) for v in self.young_cells)
        if not 0 < self.safety <= 1:
            raise ValidationError(f"safety must lie in (0, 1], got {self.safety}")
        if int(self.workers) < 1:
            raise ValidationError("workers must be >= 1")
        # building the models validates their specs early
        self.flux_model()
        self.viscosity_model()

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as err:
            raise ValidationError(str(err)) from err

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["entropy_lattice"] = list(self.entropy_lattice)
        out["young_cells"] = list(self.young_cells)
        out["assumption_range"] = list(self.assumption_range)
        return out

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def flux_model(self) -> FluxModel:
        return flux_from_spec(self.flux)

    def viscosity_model(self) -> ViscosityModel:
        return viscosity_from_spec(self.viscosity)

    @property
    def params(self) -> RegularizationParams:
        return RegularizationParams(self.epsilon, self.delta)

    def snapshot_times(self) -> list:
        if isinstance(self.snapshots, (int, np.integer)):
            n = int(self.snapshots)
            if n < 2:
                raise ValidationError("need at least 2 snapshots")
            return [self.T * (i + 1) / n for i in range(n)]
        return sorted(float(s) for s in self.snapshots)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as err:
        raise ValidationError(f"cannot read configuration {path}: {err}") from err
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be a mapping")
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# grids and initial data

def required_spacing(epsilon: float, delta: float, shock_only: bool = False) -> Optional[float]:
    """Largest admissible h: min(eps, sqrt(delta))/4 over the positive parameters.

    With ``shock_only`` the dispersive term is dropped whenever ``epsilon > 0``.
    Returns None when neither parameter is positive.
    """
    scales = []
    if epsilon > 0:
        scales.append(epsilon)
    if delta > 0 and not (shock_only and epsilon > 0):
        scales.append(math.sqrt(delta))
    return min(scales) / 4.0 if scales else None


def _gaussian_domain(config: ExperimentConfig, flux: FluxModel) -> tuple:
    spec = config.initial
    amp = float(spec.get("amplitude", 1.0))
    width = float(spec.get("width", 0.1))
    center = float(spec.get("center", 0.0))
    values = np.linspace(-abs(amp), abs(amp), 257)
    speed = float(np.max(np.abs(flux.df(values))))
    reach = _GAUSS_REACH * width + speed * config.T + 10.0 * (config.delta * config.T) ** (1.0 / 3.0)
    # the occupied interval must stay 10% of the domain away from the seam
    half = reach / 0.8
    return center - half, center + half


def build_grid(config: ExperimentConfig) -> Grid1D:
    """Grid from ``config.domain``, with cells from the resolution rule if absent.

    A coarser explicit grid is rejected unless ``override_resolution`` is set.
    With the override and no explicit cell count, the dispersive term of the
    rule is dropped for viscous runs.
    """
    kind = config.initial["kind"]
    dom = dict(config.domain)
    if "x_left" in dom and "x_right" in dom:
        lo, hi = float(dom["x_left"]), float(dom["x_right"])
    elif kind == "sine":
        lo, hi = 0.0, 2.0 * math.pi
    elif kind == "riemann":
        lo, hi = -1.0, 1.0
    elif kind == "gaussian":
        lo, hi = _gaussian_domain(config, config.flux_model())
    else:
        x, _ = _read_initial_file(config.initial)
        lo, hi = float(x[0]), float(x[-1] + (x[1] - x[0]))
    if not hi > lo:
        raise ValidationError(f"empty domain [{lo}, {hi}]")
    h_req = required_spacing(config.epsilon, config.delta)
    if "cells" in dom:
        cells = int(dom["cells"])
        if h_req is not None and (hi - lo) / cells > h_req * (1 + 1e-12) and not config.override_resolution:
            raise ResolutionError(
                f"h={(hi - lo) / cells:.4g} exceeds the resolution bound {h_req:.4g}; "
                f"use at least {math.ceil((hi - lo) / h_req)} cells or set override_resolution")
        return Grid1D(lo, hi, cells)
    if config.override_resolution:
        h_req = required_spacing(config.epsilon, config.delta, shock_only=True)
    if h_req is None:
        raise ValidationError("epsilon = delta = 0: give domain.cells explicitly")
    return Grid1D(lo, hi, max(64, math.ceil((hi - lo) / h_req * (1 - 1e-12))))


def _read_initial_file(spec):
    if "path" not in spec:
        raise ValidationError("file initial data needs a path")
    try:
        x, u = read_snapshot_csv(spec["path"])
    except OSError as err:
        raise ValidationError(f"cannot read initial data: {err}") from err
    if len(x) < 2 or np.any(np.diff(x) <= 0):
        raise ValidationError("initial-data file needs increasing x values")
    return x, u


def initial_state(config: ExperimentConfig, grid: Grid1D) -> SimState:
    spec = config.initial
    kind = spec["kind"]
    x = grid.x
    if kind == "sine":
        amp = float(spec.get("amplitude", 1.0))
        periods = float(spec.get("periods", 1))
        u = amp * np.sin(2.0 * np.pi * periods * (x - grid.x_left) / grid.length)
    elif kind == "riemann":
        x0 = float(spec.get("x0", 0.5 * (grid.x_left + grid.x_right)))
        u = np.where(x < x0, float(spec.get("u_left", 1.0)), float(spec.get("u_right", 0.0)))
    elif kind == "gaussian":
        amp = float(spec.get("amplitude", 1.0))
        width = float(spec.get("width", 0.1))
        center = float(spec.get("center", 0.0))
        u = amp * np.exp(-0.5 * ((x - center) / width) ** 2)
    else:
        xs, us = _read_initial_file(spec)
        u = np.interp(x, xs, us, period=grid.length)
    return SimState(grid, u)


def breaking_time(state: SimState, flux: FluxModel) -> float:
    """Inviscid breaking time 1 / max(-d/dx f'(u0)); inf if characteristics never cross."""
    speed = flux.df(np.asarray(state.u))
    rate = float(np.max(-(np.roll(speed, -1) - speed) / state.grid.h))
    return 1.0 / rate if rate > 0 else math.inf


def seam_flag(traj: Trajectory) -> bool:
    """True when |u| in the outer 5% bands exceeds 1e-8 of the peak at any snapshot."""
    grid = traj.initial.grid
    x = grid.x
    band = (x < grid.x_left + 0.05 * grid.length) | (x >= grid.x_right - 0.05 * grid.length)
    for state in traj.with_initial():
        u = np.abs(np.asarray(state.u))
        peak = float(u.max())
        if peak > 0 and float(u[band].max()) > 1e-8 * peak:
            return True
    return False


# ---------------------------------------------------------------------------
# runs

@dataclass
class RunRecord:
    """Summary row of one run plus the objects it was computed from."""

    epsilon: float
    delta: float
    h: float
    dt: float
    l1_error: float
    l2_norm: float
    l5_norm: float
    linf: float
    tv_ratio: float
    energy_residual: float
    max_entropy_production: float
    concentration: float
    regime: str = "indeterminate"
    entropy_scale: float = 0.0
    seam_warning: bool = False
    steps: int = 0
    wall_time: float = 0.0
    trajectory: Optional[Trajectory] = field(default=None, repr=False)
    reference: Optional[ReferenceSolution] = field(default=None, repr=False)
    artifacts: list = field(default_factory=list, repr=False)

    def csv_values(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def as_row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def classify_regime(row) -> str:
    """convergent: tv_ratio <= 2 and production <= 0.1 * entropy scale;
    oscillatory: tv_ratio >= 5; otherwise indeterminate."""
    get = row.get if isinstance(row, dict) else lambda k, d=None: getattr(row, k, d)
    tv = float(get("tv_ratio"))
    prod = float(get("max_entropy_production"))
    scale = float(get("entropy_scale", 0.0))
    if tv >= 5:
        return "oscillatory"
    # the floor absorbs quadrature roundoff when the data carry no entropy scale
    if tv <= 2 and prod <= 0.1 * scale + _PRODUCTION_FLOOR:
        return "convergent"
    return "indeterminate"


def _godunov_trajectory(initial, T, times, flux, visc, params) -> Trajectory:
    traj = Trajectory(initial, params, flux, visc)
    state = initial
    for target in times:
        ref = godunov_integrate(state, target, flux)
        state = ref.as_state()
        traj.steps += ref.steps
        traj.snapshots.append(state)
        traj.dissipation_at.append(0.0)
        traj.parabolic_at.append(0.0)
        traj.flux_dissipation_at.append(0.0)
    speed = float(np.max(np.abs(flux.df(np.asarray(initial.u)))))
    traj.dt_max = 0.9 * initial.grid.h / speed if speed > 0 else T
    traj.sup_norm = max(float(np.max(np.abs(s.u))) for s in traj.with_initial())
    return traj


def compute_reference(config: ExperimentConfig, initial: SimState,
                      flux: Optional[FluxModel] = None) -> ReferenceSolution:
    """Exact periodic Riemann profile when available, else the refined Godunov run."""
    flux = flux or config.flux_model()
    spec = config.initial
    if spec["kind"] == "riemann" and flux.kind != "table":
        data = RiemannData(float(spec.get("u_left", 1.0)), float(spec.get("u_right", 0.0)))
        lo, hi = sorted((data.u_left, data.u_right))
        if flux.is_convex_on(lo, hi):
            try:
                return riemann_periodic_profile(initial.grid, data, flux, config.T, spec.get("x0"))
            except ValidationError:
                pass
    est = EntropyReference(flux=flux, final_time=config.T, factor=config.reference_factor)
    return est.fit(initial).reference_


def _young_window(traj: Trajectory, flux: FluxModel, m_t: int):
    """Post-breaking window [t_b, T] when it holds enough snapshots, else everything."""
    grid = traj.initial.grid
    t_end = traj.final.t
    tb = breaking_time(traj.initial, flux)
    if tb < t_end:
        inside = [s for s in traj.with_initial() if s.t >= tb - 1e-12]
        if len(inside) > m_t:
            return (grid.x_left, grid.x_right, inside[0].t, t_end)
    return None


def _write_artifacts(traj: Trajectory, out: Path, every_snapshot: bool) -> list:
    paths = [write_snapshot_csv(traj.initial, out / "initial.csv"),
             write_snapshot_csv(traj.final, out / "final.csv")]
    if every_snapshot:
        for i, s in enumerate(traj.snapshots):
            paths.append(write_snapshot_csv(s, out / "snapshots" / f"snapshot_{i:04d}.csv"))
    return paths


def run_experiment(config: ExperimentConfig) -> RunRecord:
    """Integrate, compare with the entropy reference and evaluate the enabled diagnostics.

    Artifacts go to ``config.output_dir`` when it is set. On blow-up the
    snapshots reached so far are written before the error propagates.
    """
    grid = build_grid(config)
    flux = config.flux_model()
    visc = config.viscosity_model()
    params = config.params
    u0 = initial_state(config, grid)
    times = config.snapshot_times()
    out = Path(config.output_dir) if config.output_dir else None
    diag = config.diagnostics
    start = time.perf_counter()

    if config.godunov_fallback:
        targets = [t for t in times if 0 < t < config.T] + [config.T]
        traj = _godunov_trajectory(u0, config.T, targets, flux, visc, params)
    else:
        solver = RegularizedSolver(epsilon=config.epsilon, delta=config.delta, flux=flux,
                                   viscosity=visc, final_time=config.T, snapshot_times=times,
                                   safety=config.safety)
        try:
            traj = solver.fit(u0).trajectory_
        except BlowUpError as err:
            if out is not None and err.trajectory is not None:
                _write_artifacts(err.trajectory, out, diag["snapshots_csv"])
            raise

    final = traj.final
    states = traj.with_initial()
    tv0 = total_variation(u0)
    tv1 = total_variation(final)
    tv_ratio = tv1 / tv0 if tv0 > 0 else (0.0 if tv1 == 0 else math.inf)

    reference = None
    l1 = math.nan
    if diag["reference"]:
        reference = compute_reference(config, u0, flux)
        l1 = l1_distance(final, reference)

    scale = entropy_scale(np.asarray(u0.u), flux)
    production = math.nan
    report = None
    if diag["entropy"]:
        report = entropy_production(traj, flux, test_resolution=config.entropy_lattice)
        production = report.aggregate

    concentration = math.nan
    hist = None
    if diag["young"]:
        m_x, m_t, bins = config.young_cells
        hist = young_histogram(traj, _young_window(traj, flux, m_t), m_x, m_t, bins)
        concentration = concentration_metric(hist)

    record = RunRecord(
        epsilon=config.epsilon, delta=config.delta, h=grid.h, dt=traj.dt_max,
        l1_error=l1,
        l2_norm=max(lq_norm(s, 2) for s in states),
        l5_norm=max(lq_norm(s, 5) for s in states),
        linf=traj.sup_norm,
        tv_ratio=tv_ratio,
        energy_residual=energy_balance(traj),
        max_entropy_production=production,
        concentration=concentration,
        entropy_scale=scale,
        seam_warning=config.initial["kind"] == "gaussian" and seam_flag(traj),
        steps=traj.steps,
        wall_time=time.perf_counter() - start,
        trajectory=traj, reference=reference)
    record.regime = classify_regime(record)

    if out is not None:
        paths = _write_artifacts(traj, out, diag["snapshots_csv"])
        if reference is not None:
            paths.append(write_snapshot_csv(reference, out / "reference.csv"))
        if report is not None:
            paths.append(report.to_csv(out / "entropy_production.csv"))
        if hist is not None:
            paths.append(hist.to_csv(out / "young_histogram.csv"))
        paths.append(write_rows_csv([record], out / "summary.csv"))
        record.artifacts = paths
    return record


# ---------------------------------------------------------------------------
# sweeps

def _theorem_name(theorem) -> str:
    name = str(theorem).lower()
    if name in ("41", "42", "43"):
        name = "thm" + name
    if name not in THEOREMS:
        raise ValidationError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
    return name


def coupling_exponent(theorem, m: float = 2.0, r: float = 1.0) -> float:
    """Exponent p of the coupling delta = C * epsilon^p for the named theorem."""
    name = _theorem_name(theorem)
    m, r = float(m), float(r)
    if name == "thm41":
        if not m < 3:
            raise ValidationError(f"thm41 requires m < 3, got m={m}")
        return (5.0 - m) / (3.0 - m)
    if name == "thm42":
        if not r >= 1:
            raise ValidationError(f"thm42 requires r >= 1, got r={r}")
        if not m < 5.0 - 1.0 / r:
            raise ValidationError(f"thm42 requires m < 5 - 1/r = {5.0 - 1.0 / r:g}, got m={m}")
        return (5.0 - m) / (r * (5.0 - m) - 1.0)
    if name == "thm43":
        if m != 2:
            raise ValidationError(f"thm43 requires m = 2, got m={m}")
        return 3.0
    raise ValidationError("the free coupling mode takes an explicit exponent")


@dataclass
class SweepResult:
    rows: list
    theorem: str = "free"
    C: float = 0.1
    exponent: float = 3.0

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: -r.epsilon)

    def __len__(self):
        return len(self.rows)

    @property
    def l1_decreasing(self) -> bool:
        errs = [r.l1_error for r in self.rows]
        return len(errs) > 1 and all(b < a for a, b in zip(errs, errs[1:]))

    @property
    def production_decreasing(self) -> bool:
        vals = [r.max_entropy_production for r in self.rows]
        return len(vals) > 1 and all(b < a for a, b in zip(vals, vals[1:]))


def _member(config):
    try:
        return run_experiment(config)
    except (ValidationError, DomainError, BlowUpError) as err:
        return err


def sweep(config: ExperimentConfig, theorem="thm43", C: float = 0.1,
          epsilons: Sequence[float] = (0.04, 0.02, 0.01), exponent: Optional[float] = None,
          workers: Optional[int] = None) -> SweepResult:
    """Run ``config`` once per epsilon with delta = C * epsilon^p.

    ``p`` comes from :func:`coupling_exponent`, or from ``exponent`` in the
    free mode. Members run on up to ``workers`` processes; rows come back in
    decreasing epsilon regardless of completion order. A failing member raises
    :class:`SweepError` carrying the rows that did finish.
    """
    name = _theorem_name(theorem)
    eps = [check_finite_scalar(e, "epsilon") for e in epsilons]
    if len(eps) < 3:
        raise ValidationError(f"a sweep needs at least 3 epsilon values, got {len(eps)}")
    if any(not b < a for a, b in zip(eps, eps[1:])) or eps[-1] <= 0:
        raise ValidationError("epsilon values must be positive and strictly decreasing")
    C = check_finite_scalar(C, "C")
    if not C > 0:
        raise ValidationError(f"coupling constant must be > 0, got {C}")
    flux, visc = config.flux_model(), config.viscosity_model()
    if name == "free":
        if exponent is None:
            raise ValidationError("the free coupling mode needs an exponent")
        p = check_finite_scalar(exponent, "exponent")
    else:
        p = coupling_exponent(name, flux.m, visc.r)

    base = Path(config.output_dir) if config.output_dir else None
    members = []
    for i, e in enumerate(eps):
        out = str(base / f"run_{i:02d}_eps_{e:g}") if base else None
        members.append(config.replace(epsilon=e, delta=C * e ** p, output_dir=out))

    n_jobs = int(workers or config.workers)
    if n_jobs > 1:
        from joblib import Parallel, delayed
        outcomes = Parallel(n_jobs=min(n_jobs, len(members)))(delayed(_member)(m) for m in members)
    else:
        outcomes = [_member(m) for m in members]

    rows = [o for o in outcomes if isinstance(o, RunRecord)]
    result = SweepResult(rows, theorem=name, C=C, exponent=p)
    for e, o in zip(eps, outcomes):
        if not isinstance(o, RunRecord):
            if base is not None and rows:
                emit_outputs(result, {"csv"}, base)
            raise SweepError(result, e, o) from o
    return result


# ---------------------------------------------------------------------------
# tables and plots

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return f"{float(value):.17g}"


def write_rows_csv(rows: Sequence, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            values = row.csv_values() if isinstance(row, RunRecord) else [row[c] for c in CSV_COLUMNS]
            writer.writerow([_fmt(v) for v in values])
    return path


def read_rows_csv(path) -> list:
    """Rows of a sweep table as dicts of floats (``regime`` stays a string)."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != CSV_COLUMNS:
                raise ValidationError(f"{path}: header does not match the sweep table layout")
            rows = []
            for line in reader:
                if len(line) != len(CSV_COLUMNS):
                    raise ValidationError(f"{path}: expected {len(CSV_COLUMNS)} columns")
                row = {c: float(v) for c, v in zip(CSV_COLUMNS[:-1], line[:-1])}
                row["regime"] = line[-1]
                rows.append(row)
    except OSError as err:
        raise ValidationError(f"cannot read {path}: {err}") from err
    return rows


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    # keep text as text so labels stay searchable in the SVG
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def plot_l1_vs_epsilon(rows: Sequence, path) -> Path:
    plt = _pyplot()
    rows = [r.as_row() if isinstance(r, RunRecord) else r for r in rows]
    eps = np.array([r["epsilon"] for r in rows])
    err = np.array([r["l1_error"] for r in rows])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, err, "o-")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("L1 error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_final_states(rows: Sequence[RunRecord], path) -> Path:
    plt = _pyplot()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    ref_drawn = False
    for r in rows:
        if r.trajectory is not None:
            final = r.trajectory.final
            ax.plot(final.grid.x, final.u, lw=1, label=f"epsilon={r.epsilon:g}")
        if r.reference is not None and not ref_drawn:
            ax.plot(r.reference.grid.x, r.reference.u, "k--", lw=1, label="reference")
            ref_drawn = True
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def emit_outputs(result: SweepResult, formats=frozenset({"csv", "svg"}), out_dir=None) -> list:
    """Write ``sweep.csv`` and the SVG plots into ``out_dir``."""
    if not result.rows:
        raise ValidationError("nothing to emit: the sweep result is empty")
    unknown = set(formats) - {"csv", "svg"}
    if unknown:
        raise ValidationError(f"unknown output formats {sorted(unknown)}")
    out = Path(out_dir) if out_dir is not None else Path(".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        if "csv" in formats:
            paths.append(write_rows_csv(result.rows, out / "sweep.csv"))
        if "svg" in formats:
            paths.append(plot_l1_vs_epsilon(result.rows, out / "l1_vs_epsilon.svg"))
            if any(isinstance(r, RunRecord) and r.trajectory is not None for r in result.rows):
                paths.append(plot_final_states(result.rows, out / "final_states.svg"))
    except OSError as err:
        raise ValidationError(f"cannot write to {out}: {err}") from err
    return paths
