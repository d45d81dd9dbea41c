import math

import numpy as np
import pytest
from scipy.integrate import quad

from visdisp import (DomainError, EntropyPair, FluxModel, ValidationError, ViscosityModel,
                     beta_eval, flux_derivative_eval, flux_eval, flux_primitive, kruzkov_pair_eval,
                     verify_assumptions)
from visdisp.models import fit_max_constant, fit_min_constant


# --- flux_eval ---------------------------------------------------------------

def test_burgers_flux_values():
    f = FluxModel.burgers()
    assert flux_eval(f, 2.0) == 2.0
    assert flux_eval(f, 0.0) == 0.0


def test_power_flux_matches_quadrature_of_derivative():
    # oracle: integrate f'(u) = u|u|^(m-2) from 0, independent of the closed form
    m = 3.0
    expected, _ = quad(lambda s: s * abs(s) ** (m - 2), 0.0, -2.0)
    assert flux_eval(FluxModel.power(m), -2.0) == pytest.approx(8.0 / 3.0, rel=1e-12)
    assert flux_eval(FluxModel.power(m), -2.0) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("m", [1.5, 2.0, 2.5, 4.0])
def test_power_flux_is_antiderivative_of_df(m):
    f = FluxModel.power(m)
    for u in (-1.7, -0.3, 0.4, 2.2):
        integral, _ = quad(lambda s: float(f.df(s)), 0.0, u)
        assert float(f.f(u)) == pytest.approx(integral, rel=1e-9, abs=1e-12)


def test_non_finite_input_rejected():
    with pytest.raises(DomainError):
        flux_eval(FluxModel.burgers(), math.nan)
    with pytest.raises(DomainError):
        beta_eval(ViscosityModel.vonneumann(), math.inf)


def test_invalid_models_rejected():
    with pytest.raises(ValidationError):
        FluxModel("cubic")
    with pytest.raises(ValidationError):
        FluxModel.power(1.0)
    with pytest.raises(ValidationError):
        ViscosityModel.power(0.5)
    with pytest.raises(ValidationError):
        ViscosityModel("vonneumann", C2=0.0)


def test_zero_flux_is_identically_zero():
    f = FluxModel.zero()
    u = np.linspace(-3, 3, 11)
    assert np.all(f.f(u) == 0) and np.all(f.df(u) == 0)


def test_derivative_eval_burgers():
    assert flux_derivative_eval(FluxModel.burgers(), -1.5) == -1.5


# --- flux_primitive ------------------------------------------------------------

def test_burgers_primitive_values():
    f = FluxModel.burgers()
    assert flux_primitive(f, 1.0) == pytest.approx(1.0 / 6.0, rel=1e-15)
    assert flux_primitive(f, -1.0) == pytest.approx(-1.0 / 6.0, rel=1e-15)


@pytest.mark.parametrize("flux", [FluxModel.burgers(), FluxModel.power(3.0), FluxModel.zero(),
                                  FluxModel.from_table(np.linspace(-4, 4, 41),
                                                       np.linspace(-4, 4, 41) ** 2 / 2)])
def test_primitive_vanishes_at_zero(flux):
    assert flux_primitive(flux, 0.0) == pytest.approx(0.0, abs=1e-14)


def test_primitive_differentiates_back_to_flux_at_second_order():
    f = FluxModel.power(2.5)
    u = np.linspace(-3, 3, 1000)
    errors = []
    for step in (1e-2, 5e-3, 2.5e-3):
        fd = (f.primitive(u + step) - f.primitive(u - step)) / (2 * step)
        errors.append(np.max(np.abs(fd - f.f(u))))
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert min(orders) >= 1.8


def test_h_primitive_derivative_is_f_fprime():
    f = FluxModel.burgers()
    u = np.linspace(-2, 2, 101)
    step = 1e-5
    fd = (f.h_primitive(u + step) - f.h_primitive(u - step)) / (2 * step)
    assert np.allclose(fd, f.f(u) * f.df(u), atol=1e-8)


def test_table_flux_tracks_burgers():
    grid = np.linspace(-3, 3, 121)
    f = FluxModel.from_table(grid, grid ** 2 / 2)
    u = np.linspace(-2.5, 2.5, 37)
    assert np.allclose(f.f(u), u ** 2 / 2, atol=1e-3)
    assert np.allclose(f.df(u), u, atol=2e-2)


# --- beta_eval -----------------------------------------------------------------

def test_beta_examples():
    assert beta_eval(ViscosityModel.vonneumann(), 2.0) == 4.0
    assert beta_eval(ViscosityModel.power(1.0), -2.0) == -4.0
    assert beta_eval(ViscosityModel.linear(), 3.0) == 3.0
    for model in (ViscosityModel.vonneumann(), ViscosityModel.power(2.0), ViscosityModel.linear()):
        assert beta_eval(model, 0.0) == 0.0


@pytest.mark.parametrize("r", [1.0, 1.5, 2.0, 3.0])
def test_power_beta_lambda_equals_power_law(r):
    lam = np.linspace(-10, 10, 2001)
    visc = ViscosityModel.power(r)
    got = visc.beta(lam) * lam
    want = np.abs(lam) ** (3 * r)
    assert np.all(np.abs(got - want) <= 4 * np.spacing(np.maximum(want, 1e-300)) + 1e-300)


def test_dbeta_matches_finite_difference():
    visc = ViscosityModel.power(1.5)
    lam = np.linspace(-3, 3, 61)
    step = 1e-6
    fd = (visc.beta(lam + step) - visc.beta(lam - step)) / (2 * step)
    assert np.allclose(visc.dbeta(lam), fd, rtol=1e-6, atol=1e-6)
    assert visc.dbeta(0.0) == 0.0


# --- kruzkov_pair_eval -----------------------------------------------------------

def test_kruzkov_examples():
    f = FluxModel.burgers()
    assert kruzkov_pair_eval(EntropyPair(0.0), f, 2.0) == (2.0, 2.0)
    assert kruzkov_pair_eval(EntropyPair(0.7), f, 0.7) == (0.0, 0.0)
    assert kruzkov_pair_eval(EntropyPair(1.0), f, -1.0) == (2.0, 0.0)


def test_kruzkov_flux_derivative_is_fprime_times_eta_prime():
    f = FluxModel.power(3.0)
    pair = EntropyPair(0.3)
    u = np.array([-1.2, -0.4, 0.1, 0.9, 1.7])
    step = 1e-6
    dq = (pair.q(u + step, f) - pair.q(u - step, f)) / (2 * step)
    assert np.allclose(dq, f.df(u) * np.sign(u - 0.3), rtol=1e-6)


# --- verify_assumptions ----------------------------------------------------------

def test_burgers_vonneumann_passes_everything():
    report = verify_assumptions(FluxModel.burgers(), ViscosityModel.power(1.0), (-10, 10), 1000)
    assert report.all_passed, report.summary()


def test_linear_beta_fails_b1_lower_bound_with_witness():
    visc = ViscosityModel.linear(r=1.0)
    report = verify_assumptions(FluxModel.burgers(), visc, (-10, 10), 1000)
    b1 = report["B1"]
    assert not b1.passed
    assert "lower" in b1.detail
    w = b1.witness
    # the witness is a genuine violation: l^2 < C2 |l|^3 at |l| >= N
    assert abs(w) >= visc.N
    assert w * w < visc.C2 * abs(w) ** 3
    # and the bound already fails at |l| = N + 1
    assert (visc.N + 1) ** 2 < visc.C2 * (visc.N + 1) ** 3


def test_power_six_flux_reports_minimal_c1():
    # oracle: max over the same samples of |f'| / (1 + |u|^(m-1))
    m = 6.0
    pts = np.linspace(-10, 10, 10_000)
    ratio = np.max(np.abs(pts) ** (m - 1) / (1 + np.abs(pts) ** (m - 1)))
    report = verify_assumptions(FluxModel.power(m, C1=2.0), ViscosityModel.vonneumann())
    assert report["A1"].passed
    assert report["A1"].minimal_constant == pytest.approx(ratio, rel=1e-9)
    tight = verify_assumptions(FluxModel.power(m, C1=0.5), ViscosityModel.vonneumann())
    assert not tight["A1"].passed


def test_assumption_preconditions():
    f, v = FluxModel.burgers(), ViscosityModel.vonneumann()
    with pytest.raises(ValidationError):
        verify_assumptions(f, v, (-10, 10), 50)
    with pytest.raises(ValidationError):
        verify_assumptions(f, v, (-5, 10))
    with pytest.raises(ValidationError):
        verify_assumptions(f, v, (-1.5, 1.5))
    with pytest.raises((ValidationError, DomainError)):
        verify_assumptions(f, v, (3, 3))


def test_decreasing_table_viscosity_fails_a2():
    lam = np.linspace(-12, 12, 49)
    beta = np.where(np.abs(lam) < 5, lam, np.sign(lam) * (10 - np.abs(lam)))
    report = verify_assumptions(FluxModel.burgers(), ViscosityModel.from_table(lam, beta))
    assert not report["A2"].passed


def test_fit_constant_helpers():
    vals = np.array([2.0, 3.0, 8.0])
    bound = np.array([1.0, 1.0, 2.0])
    assert fit_min_constant(vals, bound) == 4.0
    assert fit_max_constant(vals, bound) == 2.0
