"""Input validation helpers shared by the numerical modules and estimators."""

from __future__ import annotations

import math

import numpy as np


class DomainError(ValueError):
    """Raised for non-finite or out-of-domain inputs."""


class ValidationError(ValueError):
    """Raised when a configuration or call violates a documented precondition."""


def check_finite_scalar(value, name: str = "value") -> float:
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name} must be a real number, got {value!r}") from exc
    if not math.isfinite(out):
        raise DomainError(f"{name} must be finite, got {out!r}")
    return out


def check_finite_array(values, name: str = "array") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr.ravel()))[0])
        raise DomainError(f"{name} has a non-finite entry at index {bad}")
    return arr


def check_nonnegative(value, name: str) -> float:
    out = check_finite_scalar(value, name)
    if out < 0:
        raise ValidationError(f"{name} must be >= 0, got {out}")
    return out


def check_positive(value, name: str) -> float:
    out = check_finite_scalar(value, name)
    if out <= 0:
        raise ValidationError(f"{name} must be > 0, got {out}")
    return out


def check_interval(interval, name: str = "interval") -> tuple[float, float]:
    try:
        lo, hi = interval
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be a (lo, hi) pair") from exc
    lo = check_finite_scalar(lo, f"{name}[0]")
    hi = check_finite_scalar(hi, f"{name}[1]")
    if not hi > lo:
        raise ValidationError(f"{name} is empty: ({lo}, {hi})")
    return lo, hi
