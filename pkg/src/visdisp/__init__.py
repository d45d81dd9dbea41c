"""Numerical experiments for conservation laws with degenerate viscosity and
dispersion: u_t + f(u)_x = eps (beta(u_x))_x - delta u_xxx on a periodic grid."""

from ._validation import DomainError, ValidationError
from .diagnostics import (EntropyProductionReport, YoungHistogram, concentration_metric,
                          derivative_bound_quantity, entropy_production, entropy_scale,
                          l1_distance, lq_norm, power_law_slope, sup_scaling_fit,
                          total_variation, young_histogram)
from .estimators import EntropyReference, RegularizedSolver
from .harness import (ExperimentConfig, ResolutionError, RunRecord, SweepError, SweepResult,
                      classify_regime, coupling_exponent, emit_outputs, load_config,
                      run_experiment, sweep)
from .models import (AssumptionReport, EntropyPair, FluxModel, ViscosityModel, beta_eval,
                     flux_derivative_eval, flux_eval, flux_primitive, kruzkov_pair_eval,
                     verify_assumptions)
from .reference import (ReferenceSolution, RiemannData, godunov_flux, godunov_integrate,
                        norm_contraction_check, riemann_exact, riemann_periodic_profile)
from .solver import (BlowUpError, Grid1D, RegularizationParams, SimState, Trajectory, advance,
                     energy_balance, integrate, second_energy_balance, stable_timestep)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport", "BlowUpError", "DomainError", "EntropyPair", "EntropyProductionReport",
    "EntropyReference", "ExperimentConfig", "FluxModel", "Grid1D", "ReferenceSolution",
    "RegularizationParams", "RegularizedSolver", "ResolutionError", "RiemannData", "RunRecord",
    "SimState", "SweepError", "SweepResult", "Trajectory", "ValidationError", "ViscosityModel",
    "YoungHistogram", "advance", "beta_eval", "classify_regime", "concentration_metric",
    "coupling_exponent", "derivative_bound_quantity", "emit_outputs", "energy_balance",
    "entropy_production", "entropy_scale", "flux_derivative_eval", "flux_eval", "flux_primitive",
    "godunov_flux", "godunov_integrate", "integrate", "kruzkov_pair_eval", "l1_distance",
    "load_config", "lq_norm", "norm_contraction_check", "power_law_slope", "riemann_exact",
    "riemann_periodic_profile", "run_experiment", "second_energy_balance", "stable_timestep",
    "sup_scaling_fit", "sweep", "total_variation", "verify_assumptions", "young_histogram",
]
