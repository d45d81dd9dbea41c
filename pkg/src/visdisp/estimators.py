"""scikit-learn style wrappers so runs compose with ``clone``/``set_params``.

``fit`` takes the initial :class:`~visdisp.solver.SimState` (or a bare array
of nodal values together with ``grid``) and stores fitted attributes with a
trailing underscore, following the scikit-learn convention.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .diagnostics import l1_distance
from .models import FluxModel, ViscosityModel
from .reference import godunov_integrate, reference_for
from .solver import Grid1D, RegularizationParams, SimState, integrate


def _as_state(X, grid=None) -> SimState:
    if isinstance(X, SimState):
        return X
    if grid is None:
        raise TypeError("pass a SimState, or nodal values together with grid=")
    return SimState(grid, np.asarray(X, dtype=float).ravel())


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class RegularizedSolver(BaseEstimator):
    """Evolves initial data under the regularised equation up to ``final_time``."""

    def __init__(self, epsilon=0.0, delta=0.0, flux=None, viscosity=None, final_time=1.0,
                 snapshot_times=(), safety=0.5):
        self.epsilon = epsilon
        self.delta = delta
        self.flux = flux
        self.viscosity = viscosity
        self.final_time = final_time
        self.snapshot_times = snapshot_times
        self.safety = safety

    def fit(self, X, y=None, grid: Grid1D = None):
        state = _as_state(X, grid)
        flux = self.flux if self.flux is not None else FluxModel.burgers()
        visc = self.viscosity if self.viscosity is not None else ViscosityModel.vonneumann()
        params = RegularizationParams(self.epsilon, self.delta)
        self.trajectory_ = integrate(state, self.final_time, params, flux, visc,
                                     snapshot_times=tuple(self.snapshot_times), safety=self.safety)
        self.final_state_ = self.trajectory_.final
        return self

    def predict(self, X=None):
        """Nodal values at ``final_time``."""
        _check_fitted(self, "trajectory_")
        return np.asarray(self.final_state_.u)

    def score(self, X, y=None):
        """Negative L1 distance of the final state to a reference state ``X``."""
        _check_fitted(self, "trajectory_")
        return -l1_distance(self.final_state_, X)


class EntropyReference(BaseEstimator):
    """Godunov entropy solution on a grid ``factor`` times finer than the input."""

    def __init__(self, flux=None, final_time=1.0, factor=4, cfl=0.9):
        self.flux = flux
        self.final_time = final_time
        self.factor = factor
        self.cfl = cfl

    def fit(self, X, y=None, grid: Grid1D = None):
        state = _as_state(X, grid)
        flux = self.flux if self.flux is not None else FluxModel.burgers()
        if self.factor == 1:
            self.reference_ = godunov_integrate(state, self.final_time, flux, cfl=self.cfl)
        else:
            self.reference_ = reference_for(state, self.final_time, flux, self.factor, self.cfl)
        return self

    def predict(self, X=None):
        _check_fitted(self, "reference_")
        return np.asarray(self.reference_.u)
