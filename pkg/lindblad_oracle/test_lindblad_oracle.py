import math

import numpy as np
import pytest
from pydantic import ValidationError

from cavity_qed.errors import StepUnderflow
from evolution.models import Backend, Frame, Scenario, StageKind, StagePlan
from evolution.runner import initial_state, run_scenario
from evolution.superoperator import dissipative_map
from hilbert.models import DensityMatrix
from hilbert.operations import annihilation, coherent_state, mean_photon_number, tensor_product, trace_distance
from lindblad_oracle.integrator import integrate, liouvillian_apply, oracle_run
from lindblad_oracle.models import IntegratorConfig


def _scenario(**kwargs):
    defaults = {"alpha": 0.5, "beta": 0.5, "truncation_1": 8, "truncation_2": 8}
    defaults.update(kwargs)
    return Scenario(**defaults)


def _vacuum_state(scenario):
    atom = DensityMatrix(scenario.layout.select([0]), np.diag([1.0, 0.0]))
    fields = [coherent_state(0, n).to_density() for n in scenario.truncations]
    product = tensor_product([atom] + fields)
    return DensityMatrix(scenario.layout, product.entries)


# Test step sizes must be ordered
def test_integrator_config_validation():
    with pytest.raises(ValidationError):
        IntegratorConfig(initial_step=5.0, max_step=2.0)
    with pytest.raises(ValidationError):
        IntegratorConfig(atol=0)


# Test the generator vanishes without Hamiltonian or damping
def test_liouvillian_zero_generator():
    scenario = _scenario()
    rho = initial_state(scenario)

    assert np.allclose(liouvillian_apply(rho, StageKind.FREE1, scenario), 0)


# Test the vacuum is stationary under damping
def test_liouvillian_vacuum_stationary():
    scenario = _scenario().with_damping(1.0, 1.0)

    derivative = liouvillian_apply(_vacuum_state(scenario), StageKind.FREE1, scenario)

    assert np.allclose(derivative, 0)


# Test the generator output is traceless and Hermitian
@pytest.mark.parametrize("stage", list(StageKind))
def test_liouvillian_traceless_hermitian(stage):
    scenario = _scenario().with_damping(0.5, 0.5)
    rho = run_scenario(scenario, [45.0]).density(0)

    derivative = liouvillian_apply(rho, stage, scenario)

    assert abs(np.trace(derivative)) < 1e-12
    assert np.allclose(derivative, derivative.conj().T, atol=1e-12)


# Test the field amplitude decays at rate gamma
def test_liouvillian_amplitude_decay():
    scenario = _scenario(alpha=1.0, truncation_1=20).with_damping(1.0, 0.0)
    rho = initial_state(scenario)
    lowering = np.kron(np.kron(np.eye(2), annihilation(20)), np.eye(9))

    derivative = liouvillian_apply(rho, StageKind.FREE1, scenario)
    amplitude = np.trace(lowering @ rho.entries)

    assert np.trace(lowering @ derivative) == pytest.approx(-scenario.gamma_1 * amplitude, abs=1e-9)


# Test a zero generator keeps the state constant
def test_integrate_constant_trajectory():
    scenario = _scenario()
    rho0 = initial_state(scenario)
    plan = StagePlan.from_scenario(scenario.model_copy(update={"stage_durations": (0, 30, 0, 30, 0)}))

    trajectory = integrate(rho0, plan, [0.0, 20.0, 60.0])

    assert trajectory.backend is Backend.ORACLE
    for rho in trajectory.densities():
        assert trace_distance(rho, rho0) < 1e-12


# Test pure damping reaches <n> = e^-1 at gamma tau = 0.5
def test_integrate_photon_decay():
    scenario = _scenario(alpha=1.0, truncation_1=20, stage_durations=(0, 50, 0, 0, 0))
    scenario = scenario.model_copy(update={"gamma_1": 0.01})
    plan = StagePlan.from_scenario(scenario)

    trajectory = integrate(initial_state(scenario), plan, [25.0, 50.0])

    assert mean_photon_number(trajectory.density(0), 1) == pytest.approx(math.exp(-0.5), abs=1e-6)
    assert mean_photon_number(trajectory.density(1), 1) == pytest.approx(math.exp(-1.0), abs=1e-6)


# Test the oracle certifies the factorized maps over the five stages
def test_oracle_matches_dense():
    scenario = _scenario().with_damping(0.05, 0.05)
    times = np.linspace(0.0, 90.0, 10)

    oracle = oracle_run(scenario, times)
    dense = run_scenario(scenario, times)

    for i in range(len(times)):
        assert trace_distance(oracle.density(i), dense.density(i)) < 1e-6


# Test a lab-frame scenario is integrated in the rotating frame
def test_oracle_uses_rotating_frame():
    scenario = _scenario(frame=Frame.LAB)

    trajectory = oracle_run(scenario, [0.0, 10.0])

    assert trajectory.scenario.frame is Frame.ROTATING


# Test halving the fixed step cuts the error by at least 8
def test_fixed_step_fourth_order():
    scenario = _scenario(alpha=1.0, truncation_1=10, stage_durations=(0, 10, 0, 0, 0))
    scenario = scenario.model_copy(update={"gamma_1": 0.02})
    plan = StagePlan.from_scenario(scenario)
    rho0 = initial_state(scenario)
    exact = dissipative_map(rho0, StageKind.FREE1, 10.0, scenario)

    errors = []
    for step in (1.0, 0.5):
        config = IntegratorConfig(initial_step=step, fixed_step=True)
        final = integrate(rho0, plan, [10.0], config).density(0)
        errors.append(np.max(np.abs(final.entries - exact.entries)))

    assert errors[0] / errors[1] >= 8


# Test an impossible tolerance underflows the step
def test_integrate_step_underflow():
    scenario = _scenario().with_damping(1.0, 1.0)
    plan = StagePlan.from_scenario(scenario)
    config = IntegratorConfig(initial_step=0.5, min_step=0.1, atol=1e-30)

    with pytest.raises(StepUnderflow):
        integrate(initial_state(scenario), plan, [30.0], config)
