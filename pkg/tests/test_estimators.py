import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from visdisp import FluxModel, Grid1D, SimState, ViscosityModel, l1_distance
from visdisp.estimators import EntropyReference, RegularizedSolver


def sine(n=128):
    g = Grid1D(0.0, 2 * np.pi, n)
    return SimState(g, np.sin(g.x))


def test_params_round_trip_and_clone():
    est = RegularizedSolver(epsilon=0.05, delta=1e-4, viscosity=ViscosityModel.linear(), final_time=0.5)
    params = est.get_params()
    assert params["epsilon"] == 0.05 and params["final_time"] == 0.5
    twin = clone(est)
    assert twin is not est and twin.get_params()["delta"] == 1e-4
    twin.set_params(epsilon=0.1)
    assert twin.epsilon == 0.1 and est.epsilon == 0.05


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        RegularizedSolver().predict()
    with pytest.raises(NotFittedError):
        EntropyReference().predict()


def test_fit_predict_and_score():
    u0 = sine()
    est = RegularizedSolver(epsilon=0.1, viscosity=ViscosityModel.linear(), final_time=0.5,
                            snapshot_times=(0.25,)).fit(u0)
    u = est.predict()
    assert u.shape == (128,)
    assert est.trajectory_.times[-1] == pytest.approx(0.5)
    assert est.score(est.final_state_) == 0.0
    ref = EntropyReference(final_time=0.5).fit(u0)
    assert ref.reference_.grid.cells == 512
    assert -est.score(ref.reference_) == pytest.approx(l1_distance(est.final_state_, ref.reference_))


def test_fit_accepts_arrays_with_grid():
    u0 = sine(64)
    a = RegularizedSolver(epsilon=0.2, final_time=0.2).fit(u0.u, grid=u0.grid).predict()
    b = RegularizedSolver(epsilon=0.2, final_time=0.2).fit(u0).predict()
    assert np.array_equal(a, b)
    with pytest.raises(TypeError):
        RegularizedSolver().fit(u0.u)


def test_reference_factor_one_matches_godunov_grid():
    u0 = sine(64)
    ref = EntropyReference(flux=FluxModel.power(3.0), final_time=0.3, factor=1).fit(u0)
    assert ref.predict().shape == (64,)
