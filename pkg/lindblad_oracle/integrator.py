"""
Brute-force master equation integration in the truncated Fock basis.

    d rho/dt = -i [H, rho] + sum_i gamma_i (2 a_i rho a_i^dagger - n_i rho - rho n_i)

The generator is applied directly to the (atom, f1, f2, atom, f1, f2)
tensor; nothing here relies on the factorized stage maps, so the two paths
validate each other.
"""

import logging
import math

import numpy as np

from cavity_qed import settings
from cavity_qed.errors import StepUnderflow
from evolution.models import (
    EXCITED,
    Backend,
    Frame,
    Scenario,
    StageKind,
    StagePlan,
    Trajectory,
)
from evolution.runner import advance, check_sample_times, initial_state
from hilbert.models import DensityMatrix, hermitize
from hilbert.operations import annihilation
from lindblad_oracle.models import IntegratorConfig

logger = logging.getLogger(__name__)


def _apply_on_axis(tensor, matrix, axis):
    return np.moveaxis(np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis)


def _broadcast(values, axis, ndim=6):
    shape = [1] * ndim
    shape[axis] = -1
    return np.reshape(values, shape)


def stage_energies(stage: StageKind, scenario: Scenario, truncations):
    """
    Diagonal of the dispersive Hamiltonian over (atom, n1, n2):
    omega (n + 1) for |e>, -omega n for |g>, on the field coupled in this stage.
    """
    energies = np.zeros((2, truncations[0] + 1, truncations[1] + 1))
    for field in (1, 2):
        omega = stage.coupling(scenario, field)
        if omega == 0:
            continue
        n = np.arange(truncations[field - 1] + 1)
        levels = np.where(np.arange(2)[:, None] == EXCITED, n + 1, -n) * omega
        shape = [2, 1, 1]
        shape[field] = -1
        energies = energies + levels.reshape(shape)
    return energies


def _ramsey_hamiltonian(scenario: Scenario):
    duration = StageKind.RAMSEY.duration(scenario)
    if duration == 0:
        return None
    return (scenario.ramsey_angle / duration) * np.array([[0, 1], [1, 0]], dtype=complex)


def _generator(stage: StageKind, scenario: Scenario, truncations):
    """d/dt of the 6-axis tensor inside ``stage``, rotating frame."""
    energies = stage_energies(stage, scenario, truncations)
    commutator = -1j * (energies[:, :, :, None, None, None] - energies[None, None, None])
    ramsey = _ramsey_hamiltonian(scenario) if stage is StageKind.RAMSEY else None
    lowering = [annihilation(n) for n in truncations]
    numbers = [np.arange(n + 1, dtype=float) for n in truncations]

    def apply(tensor):
        result = commutator * tensor
        if ramsey is not None:
            result = result - 1j * (
                _apply_on_axis(tensor, ramsey, 0) - _apply_on_axis(tensor, ramsey.conj(), 3)
            )
        for field, gamma in zip((1, 2), scenario.gammas):
            if gamma == 0:
                continue
            a = lowering[field - 1]
            jumped = _apply_on_axis(_apply_on_axis(tensor, a, field), a.conj(), field + 3)
            n = numbers[field - 1]
            decay = (_broadcast(n, field) + _broadcast(n, field + 3)) * tensor
            result = result + gamma * (2 * jumped - decay)
        return result

    return apply


def liouvillian_apply(rho: DensityMatrix, stage: StageKind, scenario: Scenario):
    """Instantaneous d rho/dt inside ``stage`` as a matrix (rotating frame)."""
    truncations = (rho.layout.dims[1] - 1, rho.layout.dims[2] - 1)
    derivative = _generator(stage, scenario, truncations)(rho.tensor())
    return derivative.reshape(rho.dim, rho.dim)


def _rk4(generator, y, h):
    k1 = generator(y)
    k2 = generator(y + 0.5 * h * k1)
    k3 = generator(y + 0.5 * h * k2)
    k4 = generator(y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _renormalize(tensor, dim, config: IntegratorConfig):
    matrix = hermitize(tensor.reshape(dim, dim))
    trace = np.trace(matrix).real
    drift = abs(trace - 1)
    logger.debug(f"Trace drift {drift:.3e}")
    if drift > config.max_trace_drift:
        logger.error(f"Trace drift {drift:.3e} exceeds {config.max_trace_drift:.1e}")
        raise StepUnderflow(
            f"Trace drifted by {drift:.3e} in one step; lower atol or initial_step"
        )
    return (matrix / trace).reshape(tensor.shape)


class _Stepper:
    """Carries the adaptive step size across intervals and stages."""

    def __init__(self, scenario: Scenario, config: IntegratorConfig):
        self.scenario = scenario
        self.config = config
        self.step = config.initial_step
        self.steps_taken = 0

    def __call__(self, rho: DensityMatrix, stage: StageKind, tau, elapsed=0.0):
        truncations = (rho.layout.dims[1] - 1, rho.layout.dims[2] - 1)
        generator = _generator(stage, self.scenario, truncations)
        if self.config.fixed_step:
            tensor = self._fixed(generator, rho.tensor(), rho.dim, tau)
        else:
            tensor = self._adaptive(generator, rho.tensor(), rho.dim, tau)
        return DensityMatrix.from_tensor(
            rho.layout, tensor, positivity_tolerance=settings.ORACLE_POSITIVITY_TOLERANCE
        )

    def _fixed(self, generator, y, dim, duration):
        count = max(1, math.ceil(duration / self.config.initial_step - 1e-12))
        h = duration / count
        for _ in range(count):
            y = _renormalize(_rk4(generator, y, h), dim, self.config)
            self.steps_taken += 1
        return y

    def _adaptive(self, generator, y, dim, duration):
        config = self.config
        elapsed = 0.0
        while duration - elapsed > 1e-12 * max(1.0, duration):
            h = min(self.step, duration - elapsed)
            full = _rk4(generator, y, h)
            half = _rk4(generator, _rk4(generator, y, 0.5 * h), 0.5 * h)
            error = float(np.max(np.abs(full - half)))
            if error <= config.atol:
                y = _renormalize(half, dim, config)
                elapsed += h
                self.steps_taken += 1
                growth = 2.0 if error == 0 else min(2.0, 0.9 * (config.atol / error) ** 0.2)
                # shortened final steps do not shrink the running step
                if h == self.step:
                    self.step = min(config.max_step, h * max(1.0, growth))
                continue
            self.step = h * max(0.1, 0.9 * (config.atol / error) ** 0.2)
            if self.step < config.min_step:
                logger.error(f"Step {self.step:.3e} below the minimum {config.min_step:.1e}")
                raise StepUnderflow(
                    f"Required step {self.step:.3e} us is below {config.min_step:.1e} us"
                )
        return y


def integrate(rho0: DensityMatrix, plan: StagePlan, grid, config: IntegratorConfig = None) -> Trajectory:
    """
    Integrate the master equation over the stage plan and record the state at
    every grid time.

    :param rho0: State at t0 on the plan's (atom, field1, field2) layout.
    :param plan: Stage plan; lab-frame scenarios are integrated in the
        rotating frame.
    :param grid: Sorted sample times within the plan.
    :raises StepUnderflow: when the error control needs a step below
        ``config.min_step`` or the trace drifts.
    """
    config = config or IntegratorConfig()
    scenario = plan.scenario
    if scenario.frame is Frame.LAB:
        logger.info("Oracle integrates in the rotating frame")
        scenario = scenario.model_copy(update={"frame": Frame.ROTATING})
        plan = StagePlan.from_scenario(scenario)
    times = check_sample_times(grid, plan)
    stepper = _Stepper(scenario, config)
    logger.info(f"Oracle run: dim={rho0.dim}, {times.size} samples")

    rho = DensityMatrix(
        rho0.layout, rho0.entries, positivity_tolerance=settings.ORACLE_POSITIVITY_TOLERANCE
    )
    snapshots = []
    current = 0.0
    for t in times:
        rho = advance(rho, plan, current, t, stepper)
        current = t
        snapshots.append(rho)
    logger.info(f"Oracle run finished after {stepper.steps_taken} steps")

    return Trajectory(
        times=times,
        stages=tuple(plan.stage_at(t) for t in times),
        snapshots=tuple(snapshots),
        backend=Backend.ORACLE,
        scenario=scenario,
    )


def oracle_run(scenario: Scenario, sample_times, initial=None, config: IntegratorConfig = None):
    """Same call shape as ``run_scenario``, for backend selection."""
    if scenario.frame is Frame.LAB:
        scenario = scenario.model_copy(update={"frame": Frame.ROTATING})
    rho0 = initial_state(scenario) if initial is None else initial
    return integrate(rho0, StagePlan.from_scenario(scenario), sample_times, config)
