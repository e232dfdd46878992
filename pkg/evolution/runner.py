import logging

import numpy as np

from cavity_qed import settings
from entanglement.concurrence import trajectory_concurrences
from evolution.models import Backend, Scenario, StagePlan, Trajectory
from evolution.superoperator import stage_step
from hilbert.models import PureState, SubsystemLayout
from hilbert.operations import coherent_state, tensor_product

logger = logging.getLogger(__name__)


def atomic_superposition(phi):
    """(|e> + exp(-i phi/2)|g>)/sqrt(2)."""
    return PureState(
        SubsystemLayout.single(2, "atom"),
        np.array([1.0, np.exp(-0.5j * phi)]) / np.sqrt(2),
    )


def initial_pure_state(scenario: Scenario) -> PureState:
    truncation_1, truncation_2 = scenario.truncations
    atom = atomic_superposition(scenario.phi)
    field_1 = coherent_state(scenario.alpha, truncation_1, scenario.tail_tolerance)
    field_2 = coherent_state(scenario.beta, truncation_2, scenario.tail_tolerance)
    state = tensor_product([atom, field_1, field_2])
    return PureState(scenario.layout, state.amplitudes)


def initial_state(scenario: Scenario):
    """Dense |psi(t0)><psi(t0)| on the scenario layout."""
    return initial_pure_state(scenario).to_density()


def check_sample_times(sample_times, plan: StagePlan):
    times = np.asarray(sample_times, dtype=float).reshape(-1)
    if times.size == 0:
        raise ValueError("At least one sample time is required")
    if np.any(np.diff(times) < 0):
        raise ValueError("Sample times must be sorted")
    if times[0] < 0 or times[-1] > plan.end * (1 + 1e-12) + 1e-12:
        raise ValueError(f"Sample times must lie within [0, {plan.end}]")
    return np.clip(times, 0.0, plan.end)


def advance(state, plan: StagePlan, start, stop, step):
    """
    Carry ``state`` from time ``start`` to ``stop`` across stage boundaries;
    ``step(state, stage, tau, elapsed)`` advances inside one stage, starting
    at time ``elapsed``.
    """
    for segment in plan.segments:
        lower = max(start, segment.start)
        upper = min(stop, segment.end)
        if upper > lower:
            state = step(state, segment.stage, upper - lower, lower)
    return state


def run_scenario(scenario: Scenario, sample_times, initial=None) -> Trajectory:
    """
    Dense evolution through the five stages, recording the state at every
    sample time. The end of one stage is the initial state of the next.

    :param scenario: Physical parameters.
    :param sample_times: Sorted times (us) within [t0, t5].
    :param initial: Optional initial density matrix; defaults to the
        atomic superposition times the two coherent fields.
    """
    plan = StagePlan.from_scenario(scenario)
    times = check_sample_times(sample_times, plan)
    rho = initial_state(scenario) if initial is None else initial
    logger.info(
        f"Dense run: N={scenario.truncations}, {times.size} samples, "
        f"frame={scenario.frame.value}"
    )

    def step(state, stage, tau, elapsed):
        return stage_step(state, stage, tau, scenario, elapsed)

    snapshots = []
    current = 0.0
    for t in times:
        rho = advance(rho, plan, current, t, step)
        current = t
        snapshots.append(rho)

    return Trajectory(
        times=times,
        stages=tuple(plan.stage_at(t) for t in times),
        snapshots=tuple(snapshots),
        backend=Backend.DENSE,
        scenario=scenario,
    )


def converge_truncation(scenario: Scenario, sample_times, runner=run_scenario):
    """
    Raise both truncations until the pairwise concurrences stop changing.

    Each round adds ``settings.CONVERGENCE_STEP`` photons to N1 and N2 and
    stops when the largest change over the grid is below
    ``settings.CONVERGENCE_TOLERANCE``.

    :return: (converged scenario, its trajectory).
    """
    trajectory = runner(scenario, sample_times)
    previous = trajectory_concurrences(trajectory)
    for _ in range(settings.CONVERGENCE_MAX_ROUNDS):
        truncation_1, truncation_2 = scenario.truncations
        scenario = scenario.with_truncations(
            truncation_1 + settings.CONVERGENCE_STEP,
            truncation_2 + settings.CONVERGENCE_STEP,
        )
        trajectory = runner(scenario, sample_times)
        current = trajectory_concurrences(trajectory)
        change = float(np.max(np.abs(current - previous)))
        logger.info(f"Truncation {scenario.truncations}: concurrence change {change:.3e}")
        if change < settings.CONVERGENCE_TOLERANCE:
            return scenario, trajectory
        previous = current
    logger.warning(
        f"Truncation did not converge after {settings.CONVERGENCE_MAX_ROUNDS} rounds"
    )
    return scenario, trajectory
