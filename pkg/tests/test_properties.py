"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from visdisp import FluxModel, Grid1D, RegularizationParams, SimState, ViscosityModel, godunov_flux, l1_distance
from visdisp.harness import CSV_COLUMNS, RunRecord, classify_regime, read_rows_csv, write_rows_csv
from visdisp.models import EntropyPair
from visdisp.solver import advance, mass, stable_timestep

finite = st.floats(-50, 50, allow_nan=False)
states = st.floats(-3, 3, allow_nan=False)
VISCOSITIES = [ViscosityModel.vonneumann(), ViscosityModel.linear(), ViscosityModel.power(1.5),
               ViscosityModel.power(2.0)]
FLUXES = [FluxModel.burgers(), FluxModel.power(3.0), FluxModel.power(2.5)]


@given(finite, st.sampled_from(VISCOSITIES))
def test_viscosity_is_monotone_sign(lam, visc):
    assert float(visc.beta(lam)) * lam >= 0


@given(states, states, st.sampled_from(FLUXES))
def test_godunov_flux_consistent_and_between_extrema(a, b, flux):
    F = float(godunov_flux(a, b, flux))
    assert math.isclose(float(godunov_flux(a, a, flux)), float(flux.f(a)), rel_tol=1e-12, abs_tol=1e-15)
    # the fluxes are convex with their minimum at 0; include it when in range
    s = np.append(np.linspace(min(a, b), max(a, b), 2001), np.clip(0.0, min(a, b), max(a, b)))
    vals = flux.f(s)
    assert vals.min() - 1e-12 <= F <= vals.max() + 1e-12


@given(states, states, states, st.sampled_from(FLUXES))
def test_godunov_flux_monotone(a, b, c, flux):
    lo, hi = sorted((a, b))
    assert godunov_flux(lo, c, flux) <= godunov_flux(hi, c, flux) + 1e-12
    assert godunov_flux(c, lo, flux) >= godunov_flux(c, hi, flux) - 1e-12


@given(states, states, states, st.sampled_from(FLUXES))
def test_kruzkov_pair_lipschitz(u, v, k, flux):
    pair = EntropyPair(k)
    lip = float(np.max(np.abs(flux.df(np.linspace(-3, 3, 601)))))
    assert abs(float(pair.eta(u) - pair.eta(v))) <= abs(u - v) + 1e-12
    assert abs(float(pair.q(u, flux) - pair.q(v, flux))) <= lip * abs(u - v) * (1 + 1e-9) + 1e-12


def grid_arrays(n=32):
    return arrays(np.float64, n, elements=st.floats(-2, 2, allow_nan=False))


@given(grid_arrays(), grid_arrays(), grid_arrays())
def test_l1_distance_is_a_metric(a, b, c):
    g = Grid1D(0, 1, 32)
    A, B, C = (SimState(g, x) for x in (a, b, c))
    assert l1_distance(A, A) == 0
    assert l1_distance(A, B) == l1_distance(B, A)
    assert l1_distance(A, C) <= l1_distance(A, B) + l1_distance(B, C) + 1e-12


@settings(max_examples=40, deadline=None)
@given(grid_arrays(), st.sampled_from(VISCOSITIES), st.sampled_from(FLUXES))
def test_one_step_conserves_mass(u, visc, flux):
    g = Grid1D(0, 1, 32)
    s = SimState(g, u)
    params = RegularizationParams(0.01, 1e-5)
    dt = stable_timestep(s, params, flux, visc)
    nxt = advance(s, dt, params, flux, visc)
    scale = max(1.0, float(np.sum(np.abs(u)) * g.h))
    assert abs(mass(nxt) - mass(s)) <= 1e-12 * scale


metric = st.floats(0, 100, allow_nan=False)


@given(metric, metric, metric)
def test_classification_is_pure_and_total(tv, prod, scale):
    r = RunRecord(epsilon=0.01, delta=1e-7, h=0.01, dt=1e-3, l1_error=0.1, l2_norm=1.0, l5_norm=1.0,
                  linf=1.0, tv_ratio=tv, energy_residual=0.0, max_entropy_production=prod,
                  concentration=0.0, entropy_scale=scale)
    first = classify_regime(r)
    assert first == classify_regime(r)
    assert first in ("convergent", "oscillatory", "indeterminate")
    if tv >= 5:
        assert first == "oscillatory"


@settings(max_examples=30, deadline=None)
@given(values=st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=12, max_size=12))
def test_csv_round_trip_bit_exact(values, tmp_path_factory):
    r = RunRecord(**dict(zip(CSV_COLUMNS[:12], values[:12])))
    r.regime = "indeterminate"
    path = tmp_path_factory.mktemp("rt") / "rows.csv"
    write_rows_csv([r], path)
    back = read_rows_csv(path)[0]
    for c in CSV_COLUMNS[:12]:
        assert np.float64(back[c]).tobytes() == np.float64(getattr(r, c)).tobytes()
