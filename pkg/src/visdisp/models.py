"""Flux and viscosity models, Kruzkov entropy pairs and sampled assumption checks.

Models are frozen dataclasses whose evaluators accept scalars or numpy arrays.
The scalar entry points (``flux_eval``, ``beta_eval``, ...) reject non-finite
input; the vectorised methods are used by the solvers on validated arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from ._validation import DomainError, ValidationError, check_finite_scalar, check_interval

FLUX_KINDS = ("burgers", "power", "table", "zero")
VISCOSITY_KINDS = ("power", "linear", "vonneumann", "table")


def _pchip(points, values, name):
    x = np.asarray(points, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 4:
        raise ValidationError(f"{name} table needs matching 1-d samples (at least 4)")
    if np.any(np.diff(x) <= 0):
        raise ValidationError(f"{name} table abscissae must be strictly increasing")
    if not (x[0] <= 0.0 <= x[-1]):
        raise ValidationError(f"{name} table must bracket 0")
    return PchipInterpolator(x, y, extrapolate=False)


@dataclass(frozen=True)
class FluxModel:
    """Flux ``f`` with its derivative and primitive.

    ``kind="power"`` is the growth-class representative ``f(u) = |u|^m / m``
    (so ``f'(u) = u |u|^(m-2)``); ``m=2`` coincides with Burgers.
    ``kind="zero"`` switches the flux off (pure dispersion runs).
    """

    kind: str = "burgers"
    m: float = 2.0
    C1: float = 1.0
    table_u: Optional[tuple] = None
    table_f: Optional[tuple] = None
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in FLUX_KINDS:
            raise ValidationError(f"unknown flux kind {self.kind!r}; expected one of {FLUX_KINDS}")
        if self.kind == "burgers":
            object.__setattr__(self, "m", 2.0)
        if not self.m > 1:
            raise ValidationError(f"growth exponent m must be > 1, got {self.m}")
        if not self.C1 > 0:
            raise ValidationError(f"C1 must be > 0, got {self.C1}")
        if self.kind == "table":
            if self.table_u is None or self.table_f is None:
                raise ValidationError("table flux needs table_u and table_f")
            f = _pchip(self.table_u, self.table_f, "flux")
            prim = f.antiderivative()
            object.__setattr__(self, "table_u", tuple(float(v) for v in self.table_u))
            object.__setattr__(self, "table_f", tuple(float(v) for v in self.table_f))
            object.__setattr__(self, "_interp", (f, f.derivative(), prim, float(prim(0.0))))

    @classmethod
    def burgers(cls) -> "FluxModel":
        return cls("burgers")

    @classmethod
    def power(cls, m: float, C1: float = 1.0) -> "FluxModel":
        return cls("power", m=m, C1=C1)

    @classmethod
    def zero(cls) -> "FluxModel":
        return cls("zero")

    @classmethod
    def from_table(cls, u, f, m: float = 2.0, C1: float = 1.0) -> "FluxModel":
        return cls("table", m=m, C1=C1, table_u=tuple(u), table_f=tuple(f))

    def _table_eval(self, which, u):
        u = np.asarray(u, dtype=float)
        lo, hi = self.table_u[0], self.table_u[-1]
        if np.any((u < lo) | (u > hi)):
            raise DomainError(f"u outside the flux table range [{lo}, {hi}]")
        out = self._interp[which](u)
        if which == 2:
            out = out - self._interp[3]
        return out

    def f(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "burgers":
            return 0.5 * u * u
        if self.kind == "power":
            return np.abs(u) ** self.m / self.m
        if self.kind == "zero":
            return np.zeros_like(u)
        return self._table_eval(0, u)

    def df(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "burgers":
            return u.copy()
        if self.kind == "power":
            return u * np.abs(u) ** (self.m - 2.0)
        if self.kind == "zero":
            return np.zeros_like(u)
        return self._table_eval(1, u)

    def primitive(self, u):
        """``F`` with ``F' = f`` and ``F(0) = 0``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "burgers":
            return u ** 3 / 6.0
        if self.kind == "power":
            return np.sign(u) * np.abs(u) ** (self.m + 1.0) / (self.m * (self.m + 1.0))
        if self.kind == "zero":
            return np.zeros_like(u)
        return self._table_eval(2, u)

    def h_primitive(self, u):
        """``H`` with ``H' = f f'`` and ``H(0) = 0`` (closed forms only)."""
        u = np.asarray(u, dtype=float)
        if self.kind == "burgers":
            return u ** 4 / 8.0
        if self.kind == "power":
            return np.abs(u) ** (2.0 * self.m) / (2.0 * self.m ** 2)
        if self.kind == "zero":
            return np.zeros_like(u)
        return 0.5 * self._table_eval(0, u) ** 2 - 0.5 * float(self._table_eval(0, 0.0)) ** 2

    @property
    def convex_minimum(self) -> Optional[float]:
        """Location of the global minimum for the closed-form convex kinds."""
        if self.kind in ("burgers", "power"):
            return 0.0
        return None

    def is_convex_on(self, a: float, b: float, samples: int = 257) -> bool:
        """Strict convexity on ``[a, b]`` (sampled for tables)."""
        if self.kind in ("burgers", "power"):
            return True
        if self.kind == "zero":
            return False
        lo, hi = min(a, b), max(a, b)
        if lo == hi:
            return True
        u = np.linspace(lo, hi, samples)
        return bool(np.all(np.diff(self.df(u)) > 0))

    def df_inverse(self, xi, lo: float, hi: float):
        """Solve ``f'(u) = xi`` for ``u`` in ``[lo, hi]`` where ``f'`` is increasing."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "burgers":
            return np.clip(xi, lo, hi)
        if self.kind == "power":
            u = np.sign(xi) * np.abs(xi) ** (1.0 / (self.m - 1.0))
            return np.clip(u, lo, hi)
        # bisection on the monotone table derivative, vectorised
        a = np.full(xi.shape, lo)
        b = np.full(xi.shape, hi)
        for _ in range(80):
            mid = 0.5 * (a + b)
            below = self.df(mid) < xi
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
        return 0.5 * (a + b)


@dataclass(frozen=True)
class ViscosityModel:
    """Degenerate viscosity ``beta`` with the constants of (A2), (B1)-(B3).

    ``kind="power"`` is ``beta(l) = |l|^(3r-2) l``; ``"vonneumann"`` is the
    ``r=1`` member ``|l| l``. ``"linear"`` is ``beta(l) = l`` with a declared
    ``r`` (only used by the assumption verifier).
    """

    kind: str = "vonneumann"
    r: float = 1.0
    C2: float = 1.0
    C3: float = 1.0
    C4: float = 1.0
    C5: float = 1.0
    N: float = 1.0
    table_l: Optional[tuple] = None
    table_b: Optional[tuple] = None
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in VISCOSITY_KINDS:
            raise ValidationError(
                f"unknown viscosity kind {self.kind!r}; expected one of {VISCOSITY_KINDS}")
        if self.kind == "vonneumann":
            object.__setattr__(self, "r", 1.0)
        if not self.r >= 1:
            raise ValidationError(f"r must be >= 1, got {self.r}")
        for name in ("C2", "C3", "C4", "C5", "N"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if self.kind == "table":
            if self.table_l is None or self.table_b is None:
                raise ValidationError("table viscosity needs table_l and table_b")
            b = _pchip(self.table_l, self.table_b, "viscosity")
            object.__setattr__(self, "table_l", tuple(float(v) for v in self.table_l))
            object.__setattr__(self, "table_b", tuple(float(v) for v in self.table_b))
            object.__setattr__(self, "_interp", (b, b.derivative()))

    @classmethod
    def power(cls, r: float) -> "ViscosityModel":
        return cls("power", r=r)

    @classmethod
    def vonneumann(cls) -> "ViscosityModel":
        return cls("vonneumann")

    @classmethod
    def linear(cls, r: float = 1.0, **constants) -> "ViscosityModel":
        return cls("linear", r=r, **constants)

    @classmethod
    def from_table(cls, lam, beta, **constants) -> "ViscosityModel":
        return cls("table", table_l=tuple(lam), table_b=tuple(beta), **constants)

    @property
    def exponent(self) -> float:
        """Power ``3r - 2`` of ``|l|`` in the power family."""
        return 3.0 * self.r - 2.0

    def _table_eval(self, which, lam):
        lam = np.asarray(lam, dtype=float)
        lo, hi = self.table_l[0], self.table_l[-1]
        if np.any((lam < lo) | (lam > hi)):
            raise DomainError(f"slope outside the viscosity table range [{lo}, {hi}]")
        return self._interp[which](lam)

    def beta(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "linear":
            return lam.copy()
        if self.kind == "vonneumann":
            return np.abs(lam) * lam
        if self.kind == "power":
            if self.r == 1.0:
                return np.abs(lam) * lam
            return np.abs(lam) ** self.exponent * lam
        return self._table_eval(0, lam)

    def dbeta(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "linear":
            return np.ones_like(lam)
        if self.kind in ("vonneumann", "power"):
            # (3r-1)|l|^(3r-2); equals 0 at l=0 for r >= 1
            return (3.0 * self.r - 1.0) * np.abs(lam) ** self.exponent
        return self._table_eval(1, lam)


@dataclass(frozen=True)
class EntropyPair:
    """Kruzkov pair ``(|u-k|, sgn(u-k)(f(u)-f(k)))``."""

    k: float

    def eta(self, u):
        return np.abs(np.asarray(u, dtype=float) - self.k)

    def q(self, u, flux: FluxModel):
        u = np.asarray(u, dtype=float)
        return np.sign(u - self.k) * (flux.f(u) - flux.f(self.k))


def flux_eval(model: FluxModel, u: float) -> float:
    return float(model.f(check_finite_scalar(u, "u")))


def flux_derivative_eval(model: FluxModel, u: float) -> float:
    return float(model.df(check_finite_scalar(u, "u")))


def flux_primitive(model: FluxModel, u: float) -> float:
    return float(model.primitive(check_finite_scalar(u, "u")))


def beta_eval(model: ViscosityModel, lam: float) -> float:
    return float(model.beta(check_finite_scalar(lam, "lambda")))


def kruzkov_pair_eval(pair: EntropyPair, flux: FluxModel, u: float) -> tuple[float, float]:
    u = check_finite_scalar(u, "u")
    return float(pair.eta(u)), float(pair.q(u, flux))


# ---------------------------------------------------------------------------
# sampled verification of the structural assumptions

@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    witness: Optional[float] = None
    detail: str = ""
    minimal_constant: Optional[float] = None


@dataclass(frozen=True)
class AssumptionReport:
    checks: tuple

    def __getitem__(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.passed else "FAIL"
            line = f"{c.name}: {status}"
            if c.minimal_constant is not None:
                line += f" (minimal constant {c.minimal_constant:.6g})"
            if not c.passed:
                line += f" witness={c.witness!r} {c.detail}"
            lines.append(line)
        return "\n".join(lines)


# relative slack for identities that hold with equality, e.g. beta(l) l = |l|^3r
_RTOL = 1e-12


def _worst(points, violation):
    idx = int(np.argmax(violation))
    return float(points[idx]), float(violation[idx])


def fit_min_constant(values, bound) -> float:
    """Smallest ``C`` with ``values <= C * bound`` on the samples (``bound > 0``)."""
    values = np.asarray(values, dtype=float)
    bound = np.asarray(bound, dtype=float)
    return float(np.max(values / bound))


def fit_max_constant(values, bound) -> float:
    """Largest ``C`` with ``values >= C * bound`` on the samples (``bound > 0``)."""
    values = np.asarray(values, dtype=float)
    bound = np.asarray(bound, dtype=float)
    return float(np.min(values / bound))


def verify_assumptions(
    flux: FluxModel,
    visc: ViscosityModel,
    interval: Sequence[float] = (-10.0, 10.0),
    samples: int = 10_000,
) -> AssumptionReport:
    """Check (A1), (A2), (B1), (B2), (B3) on a sample grid.

    (B1) and (B2) are only tested where ``|lambda| >= N``. A failing check
    carries the sample with the largest violation as its witness. The verdict
    is a sampled one: it can refute but never prove an assumption.
    """
    lo, hi = check_interval(interval, "range")
    if samples < 100:
        raise ValidationError(f"samples must be >= 100, got {samples}")
    if not np.isclose(lo, -hi):
        raise ValidationError(f"range must be symmetric about 0, got ({lo}, {hi})")
    if hi < visc.N + 1:
        raise ValidationError(f"range must contain [-N-1, N+1] = [{-visc.N - 1}, {visc.N + 1}]")

    pts = np.linspace(lo, hi, samples)
    pts = np.union1d(pts, [0.0, -visc.N, visc.N, -(visc.N + 1), visc.N + 1])
    checks = []

    # (A1) |f'(u)| <= C1 (1 + |u|^(m-1))
    growth = 1.0 + np.abs(pts) ** (flux.m - 1.0)
    dfu = np.abs(flux.df(pts))
    c1_min = fit_min_constant(dfu, growth)
    viol = dfu - flux.C1 * growth * (1 + _RTOL)
    if np.any(viol > 0):
        w, _ = _worst(pts, viol / growth)
        checks.append(AssumptionCheck("A1", False, w, f"|f'| exceeds C1(1+|u|^(m-1)) with C1={flux.C1}", c1_min))
    else:
        checks.append(AssumptionCheck("A1", True, minimal_constant=c1_min))

    # (A2) beta(0) = 0, beta non-decreasing
    b = visc.beta(pts)
    b0 = float(visc.beta(0.0))
    drops = -np.diff(b)
    scale = np.maximum(np.abs(b[:-1]), np.abs(b[1:]))
    bad_drop = drops > _RTOL * scale
    if b0 != 0.0:
        checks.append(AssumptionCheck("A2", False, 0.0, f"beta(0) = {b0}"))
    elif np.any(bad_drop):
        idx = int(np.flatnonzero(bad_drop)[0])
        checks.append(AssumptionCheck("A2", False, float(pts[idx + 1]), "beta decreases"))
    else:
        checks.append(AssumptionCheck("A2", True))

    bl = b * pts
    big = np.abs(pts) >= visc.N
    lam_big = pts[big]
    bl_big = bl[big]
    p3r = np.abs(lam_big) ** (3.0 * visc.r)

    # (B1) C2 |l|^3r <= beta(l) l <= C3 |l|^3r for |l| >= N
    lower = visc.C2 * p3r * (1 - _RTOL) - bl_big
    upper = bl_big - visc.C3 * p3r * (1 + _RTOL)
    c2_fit = fit_max_constant(bl_big, p3r)
    if np.any(lower > 0):
        w, _ = _worst(lam_big, lower / p3r)
        checks.append(AssumptionCheck(
            "B1", False, w, f"lower bound fails: beta(l)l < C2|l|^3r with C2={visc.C2}, r={visc.r}", c2_fit))
    elif np.any(upper > 0):
        w, _ = _worst(lam_big, upper / p3r)
        checks.append(AssumptionCheck(
            "B1", False, w, f"upper bound fails: beta(l)l > C3|l|^3r with C3={visc.C3}, r={visc.r}",
            fit_min_constant(bl_big, p3r)))
    else:
        checks.append(AssumptionCheck("B1", True, minimal_constant=c2_fit))

    # (B2) beta(l) l >= C4 |l|^3 for |l| >= N
    p3 = np.abs(lam_big) ** 3
    viol = visc.C4 * p3 * (1 - _RTOL) - bl_big
    c4_fit = fit_max_constant(bl_big, p3)
    if np.any(viol > 0):
        w, _ = _worst(lam_big, viol / p3)
        checks.append(AssumptionCheck("B2", False, w, f"beta(l)l < C4|l|^3 with C4={visc.C4}", c4_fit))
    else:
        checks.append(AssumptionCheck("B2", True, minimal_constant=c4_fit))

    # (B3) beta(l) l >= C5 |l|^3r for all l
    nz = pts != 0
    p3r_all = np.abs(pts[nz]) ** (3.0 * visc.r)
    viol = visc.C5 * p3r_all * (1 - _RTOL) - bl[nz]
    c5_fit = fit_max_constant(bl[nz], p3r_all)
    if np.any(viol > 0):
        w, _ = _worst(pts[nz], viol / p3r_all)
        checks.append(AssumptionCheck("B3", False, w, f"beta(l)l < C5|l|^3r with C5={visc.C5}", c5_fit))
    else:
        checks.append(AssumptionCheck("B3", True, minimal_constant=c5_fit))

    return AssumptionReport(tuple(checks))
