import math

import numpy as np
import pytest
from scipy.optimize import brentq

import visdisp.solver as solver
from visdisp import (BlowUpError, DomainError, FluxModel, Grid1D, RegularizationParams, SimState,
                     ValidationError, ViscosityModel, advance, energy_balance, integrate,
                     second_energy_balance, stable_timestep)
from visdisp.solver import (mass, read_snapshot_csv, semidiscrete_rhs, write_snapshot_csv)

BURGERS = FluxModel.burgers()
VN = ViscosityModel.vonneumann()
LIN = ViscosityModel.linear()
ZERO = FluxModel.zero()


def sine_state(n, length=2 * np.pi, amp=1.0):
    g = Grid1D(0.0, length, n)
    return SimState(g, amp * np.sin(2 * np.pi * g.x / length))


# --- types -----------------------------------------------------------------

def test_grid_properties():
    g = Grid1D(-1.0, 1.0, 400)
    assert g.h == pytest.approx(0.005)
    assert g.x[0] == -1.0 and len(g.x) == 400
    assert g.refined(4).cells == 1600


def test_grid_rejects_too_few_cells():
    with pytest.raises(ValidationError):
        Grid1D(0, 1, 8)
    with pytest.raises(ValidationError):
        Grid1D(1, 0, 32)


def test_state_rejects_non_finite_and_is_read_only():
    g = Grid1D(0, 1, 16)
    bad = np.zeros(16)
    bad[3] = np.nan
    with pytest.raises(DomainError):
        SimState(g, bad)
    s = SimState(g, np.zeros(16))
    with pytest.raises(ValueError):
        s.u[0] = 1.0


def test_negative_parameters_rejected():
    with pytest.raises(ValidationError):
        RegularizationParams(-0.1, 0.0)


# --- semidiscrete_rhs ----------------------------------------------------------

def test_rhs_of_constant_is_zero():
    g = Grid1D(0, 1, 32)
    s = SimState(g, np.full(32, 0.7))
    rhs = semidiscrete_rhs(s, RegularizationParams(0.1, 0.01), BURGERS, VN)
    assert np.all(rhs == 0.0)


def test_rhs_burgers_matches_analytic_flux_derivative():
    errs = []
    for n in (128, 256):
        s = sine_state(n)
        rhs = semidiscrete_rhs(s, RegularizationParams(), BURGERS, VN)
        errs.append(np.max(np.abs(rhs + np.sin(s.x) * np.cos(s.x))))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_rhs_dispersion_matches_third_derivative():
    errs = []
    for n in (128, 256):
        s = sine_state(n)
        rhs = semidiscrete_rhs(s, RegularizationParams(0.0, 1.0), ZERO, VN)
        errs.append(np.max(np.abs(rhs - np.cos(s.x))))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_rhs_linear_viscosity_is_second_difference():
    s = sine_state(256)
    rhs = semidiscrete_rhs(s, RegularizationParams(1.0, 0.0), ZERO, LIN)
    assert np.max(np.abs(rhs + np.sin(s.x))) < 1e-3


def test_rhs_vonneumann_matches_analytic_divergence():
    # d/dx (|u_x| u_x) for u = sin: 2|cos| * (-sin)
    s = sine_state(1024)
    rhs = semidiscrete_rhs(s, RegularizationParams(1.0, 0.0), ZERO, VN)
    want = -2.0 * np.abs(np.cos(s.x)) * np.sin(s.x)
    assert np.max(np.abs(rhs - want)) < 1e-2


# --- stable_timestep --------------------------------------------------------------

def unit_state():
    g = Grid1D(0.0, 1.0, 100)
    return SimState(g, np.sin(2 * np.pi * g.x))


def test_timestep_advective_only():
    dt = stable_timestep(unit_state(), RegularizationParams(), BURGERS, VN, safety=0.5)
    assert dt == pytest.approx(0.005, rel=1e-12)


def test_timestep_dispersive_only():
    dt = stable_timestep(unit_state(), RegularizationParams(0.0, 1e-4), ZERO, VN, safety=1.0)
    assert dt == pytest.approx(2.5e-3, rel=1e-12)


def test_timestep_diffusive_only():
    dt = stable_timestep(unit_state(), RegularizationParams(0.01, 0.0), ZERO, LIN, safety=1.0)
    assert dt == pytest.approx(5e-3, rel=1e-12)


def test_timestep_all_inactive_uses_fallback():
    s = unit_state()
    assert stable_timestep(s, RegularizationParams(), ZERO, VN, fallback=2.0) == 2.0
    with pytest.raises(ValidationError):
        stable_timestep(s, RegularizationParams(), ZERO, VN)


def test_timestep_matches_kernel_path():
    s = sine_state(300)
    params = RegularizationParams(0.02, 1e-5)
    dt = stable_timestep(s, params, BURGERS, VN)
    stepper = solver._Stepper(s.grid.h, params, BURGERS, VN, 0.5, None)
    assert stepper.codes is not None
    assert stepper.dt(np.asarray(s.u)) == pytest.approx(dt, rel=1e-13)


# --- advance ---------------------------------------------------------------------

def test_advance_constant_unchanged():
    g = Grid1D(0, 1, 32)
    s = SimState(g, np.full(32, -0.4))
    out = advance(s, 1e-3, RegularizationParams(0.1, 1e-4), BURGERS, VN)
    # the rhs vanishes exactly; only the stage weights round
    assert np.max(np.abs(out.u - s.u)) <= 4 * np.spacing(0.4)
    assert out.t == pytest.approx(1e-3)


@pytest.mark.parametrize("params", [RegularizationParams(), RegularizationParams(0.05, 0.0),
                                    RegularizationParams(0.0, 1e-4), RegularizationParams(0.05, 1e-4)])
def test_advance_conserves_mass(params):
    s = sine_state(256)
    s = SimState(s.grid, np.asarray(s.u) + 0.3)
    dt = stable_timestep(s, params, BURGERS, VN)
    out = advance(s, dt, params, BURGERS, VN)
    bound = 10 * np.finfo(float).eps * 256 * np.max(np.abs(s.u))
    assert abs(mass(out) - mass(s)) <= bound


def characteristics(x, t, u0):
    """Solve u = u0(x - u t) by bracketing the root node by node."""
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        out[i] = brentq(lambda v: v - u0(xi - v * t), -2.0, 2.0, xtol=1e-15)
    return out


def test_advance_matches_characteristics_before_breaking():
    u0 = lambda x: 0.5 * np.sin(x)
    T = 0.5
    errs = []
    for n in (128, 256):
        g = Grid1D(0, 2 * np.pi, n)
        traj = integrate(SimState(g, u0(g.x)), T, RegularizationParams(), BURGERS, VN, safety=0.5)
        errs.append(np.max(np.abs(traj.final.u - characteristics(g.x, T, u0))))
    assert errs[1] < 1e-3
    assert errs[0] / errs[1] > 3.5


def test_advance_blowup_raises():
    s = sine_state(64)
    with pytest.raises(BlowUpError):
        for _ in range(200):
            s = advance(s, 10.0, RegularizationParams(0.0, 1.0), BURGERS, VN)


def test_advance_kernel_and_numpy_agree():
    s = sine_state(200)
    params = RegularizationParams(0.02, 1e-4)
    dt = stable_timestep(s, params, BURGERS, VN)
    ref = advance(s, dt, params, BURGERS, VN)
    stepper = solver._Stepper(s.grid.h, params, BURGERS, VN, 0.5, None)
    got = stepper.step(np.asarray(s.u), dt, 0.0)
    assert np.allclose(got, ref.u, rtol=0, atol=1e-14)


# --- integrate -------------------------------------------------------------------

def test_integrate_without_snapshots_keeps_final_only():
    traj = integrate(sine_state(64), 0.1, RegularizationParams(0.01, 0.0), BURGERS, VN)
    assert len(traj.snapshots) == 1
    assert traj.final.t == 0.1


def test_integrate_hits_snapshot_times_exactly():
    times = [0.013, 0.05, 0.1]
    traj = integrate(sine_state(64), 0.1, RegularizationParams(0.01, 1e-5), BURGERS, VN,
                     snapshot_times=times)
    assert list(traj.times) == times
    assert np.all(np.diff(traj.times) > 0)


def test_integrate_rejects_bad_times():
    s = sine_state(64)
    with pytest.raises(ValidationError):
        integrate(s, 0.0, RegularizationParams(), BURGERS, VN)
    with pytest.raises(ValidationError):
        integrate(s, 1.0, RegularizationParams(), BURGERS, VN, snapshot_times=[1.5])


def test_dissipation_non_decreasing():
    traj = integrate(sine_state(256), 1.5, RegularizationParams(0.02, 1e-5), BURGERS, VN,
                     snapshot_times=np.linspace(0.1, 1.5, 15))
    assert np.all(np.diff([0.0, *traj.dissipation_at]) >= 0)
    assert np.all(np.diff([0.0, *traj.parabolic_at]) >= 0)


def test_vonneumann_sup_norm_bounded():
    traj = integrate(sine_state(512), 2.0, RegularizationParams(0.02, 0.0), BURGERS, VN,
                     snapshot_times=np.linspace(0.1, 2.0, 20))
    sup0 = float(np.max(np.abs(traj.initial.u)))
    assert max(float(np.max(np.abs(s.u))) for s in traj.snapshots) <= 1.05 * sup0


def test_integrate_blowup_carries_partial_trajectory(monkeypatch):
    monkeypatch.setattr(solver._Stepper, "dt", lambda self, u: 10.0)
    with pytest.raises(BlowUpError) as info:
        integrate(sine_state(64), 1e4, RegularizationParams(0.0, 1.0), BURGERS, VN,
                  snapshot_times=[20.0, 1e4])
    err = info.value
    assert err.trajectory is not None
    assert math.isfinite(err.time) and 0 < err.time <= 1e4
    assert 0 <= err.node < 64


def test_table_models_use_numpy_path_and_agree():
    lam = np.linspace(-40, 40, 801)
    table_visc = ViscosityModel.from_table(lam, np.abs(lam) * lam)
    u = np.linspace(-3, 3, 121)
    table_flux = FluxModel.from_table(u, u ** 2 / 2)
    params = RegularizationParams(0.05, 0.0)
    s = sine_state(128)
    a = integrate(s, 0.3, params, table_flux, table_visc)
    b = integrate(s, 0.3, params, BURGERS, VN)
    assert np.max(np.abs(a.final.u - b.final.u)) < 5e-3


# --- energy identities -------------------------------------------------------------

def test_energy_balance_constant_is_zero():
    g = Grid1D(0, 1, 32)
    traj = integrate(SimState(g, np.full(32, 2.0)), 0.5, RegularizationParams(0.1, 1e-3),
                     BURGERS, VN)
    assert energy_balance(traj) == pytest.approx(0.0, abs=1e-12)
    assert second_energy_balance(traj) == pytest.approx(0.0, abs=1e-12)


def test_energy_drift_without_viscosity_converges_at_second_order():
    # smooth burgers-kdv run before breaking
    res = []
    for n in (128, 256, 512):
        traj = integrate(sine_state(n, amp=0.5), 0.5, RegularizationParams(0.0, 1e-3), BURGERS, VN)
        res.append(abs(energy_balance(traj)))
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert min(orders) >= 1.8


def test_energy_residual_refinement_ratio():
    res = []
    for n in (256, 512):
        traj = integrate(sine_state(n), 0.5, RegularizationParams(0.05, 1e-4), BURGERS, VN)
        res.append(energy_balance(traj))
    assert 3.0 <= res[0] / res[1] <= 5.0


def test_second_energy_balance_dispersive_converges():
    res = []
    for n in (128, 256, 512):
        traj = integrate(sine_state(n, amp=0.5), 0.5, RegularizationParams(0.0, 1e-3), BURGERS, VN)
        res.append(abs(second_energy_balance(traj)))
    assert res[2] < res[1] < res[0]
    assert res[1] / res[2] >= 3.0


def test_second_energy_balance_full_parameters_ratio():
    res = []
    for n in (256, 512):
        traj = integrate(sine_state(n), 0.5, RegularizationParams(0.05, 1e-4), BURGERS, VN)
        res.append(abs(second_energy_balance(traj)))
    assert res[0] / res[1] >= 3.0


# --- snapshot dump -------------------------------------------------------------------

def test_snapshot_csv_round_trip(tmp_path):
    s = sine_state(64)
    path = write_snapshot_csv(s, tmp_path / "snap.csv")
    assert path.read_text().splitlines()[0] == "x,u"
    x, u = read_snapshot_csv(path)
    assert np.array_equal(x, s.x) and np.array_equal(u, s.u)
