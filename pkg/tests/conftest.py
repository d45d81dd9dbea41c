"""Shared long runs. The sweeps and dispersive families are computed once per
session and reused by the acceptance file and the slower diagnostics tests."""

import time

import pytest

from visdisp.harness import ExperimentConfig, run_experiment, sweep

SWEEP_EPSILONS = (0.04, 0.02, 0.01)
DISPERSIVE_DELTAS = (1e-3, 1e-4, 1e-5)

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def sine_sweep_config(viscosity):
    # the shock-layer rule h <= eps/4 sizes the grids; see the README on the override
    return ExperimentConfig(viscosity={"kind": viscosity}, T=1.5, override_resolution=True,
                            diagnostics={"snapshots_csv": False})


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


@pytest.fixture(scope="session")
def linear_sweep():
    return _timed(lambda: sweep(sine_sweep_config("linear"), "thm43", 0.1, SWEEP_EPSILONS))


@pytest.fixture(scope="session")
def vonneumann_sweep():
    return _timed(lambda: sweep(sine_sweep_config("vonneumann"), "thm41", 0.1, SWEEP_EPSILONS))


@pytest.fixture(scope="session")
def dispersive_run():
    """epsilon = 0, delta = 1e-4, well past breaking."""
    config = ExperimentConfig(T=5.0, epsilon=0.0, delta=1e-4, diagnostics={"snapshots_csv": False})
    return _timed(lambda: run_experiment(config))


@pytest.fixture(scope="session")
def dispersive_family():
    """epsilon = 0 runs for the sup-norm scaling, one per delta."""
    def go():
        records = []
        for d in DISPERSIVE_DELTAS:
            config = ExperimentConfig(T=1.5, epsilon=0.0, delta=d, snapshots=4,
                                      diagnostics={"reference": False, "entropy": False,
                                                   "young": False, "snapshots_csv": False})
            records.append(run_experiment(config))
        return records
    return _timed(go)
