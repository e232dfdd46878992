import logging
import os

from cli.export import canonical_name, write_records
from cli.models import SweepPointResult, SweepSpec
from cli.records import trajectory_records
from evolution.branches import branch_run
from evolution.models import Backend, Scenario
from evolution.runner import converge_truncation, run_scenario
from evolution.validity import dispersive_validity
from lindblad_oracle.integrator import oracle_run

logger = logging.getLogger(__name__)

RUNNERS = {
    Backend.DENSE: run_scenario,
    Backend.BRANCH: branch_run,
    Backend.ORACLE: oracle_run,
}


def run_trajectory(scenario: Scenario, sample_times, backend=Backend.DENSE, converge=False):
    """Run one scenario on the chosen backend, optionally converging N1, N2."""
    runner = RUNNERS[Backend(backend)]
    dispersive_validity(scenario)
    if converge:
        _, trajectory = converge_truncation(scenario, sample_times, runner=runner)
        return trajectory
    return runner(scenario, sample_times)


def run_point(scenario: Scenario, spec: SweepSpec, out_dir, name=None, converge=False):
    """
    Simulate one parameter tuple and write its CSV.

    :return: SweepPointResult describing the written file.
    """
    trajectory = run_trajectory(scenario, spec.sample_times(scenario), spec.backend, converge)
    records = trajectory_records(trajectory)
    if name is None:
        g = scenario.gamma_1 / scenario.omega_1 if scenario.omega_1 else scenario.gamma_1
        q = scenario.gamma_2 / scenario.omega_2 if scenario.omega_2 else scenario.gamma_2
        name = canonical_name(scenario.alpha, scenario.beta, g, q)
    path = write_records(os.path.join(out_dir, name), records)
    logger.info(f"Wrote {len(records)} records to {path}")
    return SweepPointResult(
        path=path,
        samples=len(records),
        flagged=sum(1 for r in records if r.flags),
        max_concurrences=tuple(
            max(r.value(column) for r in records) for column in ("C_AF1", "C_AF2", "C_F1F2")
        ),
        truncations=trajectory.truncations,
    )


def sweep_jobs(base: Scenario, spec: SweepSpec):
    """(scenario, file name) for every point of the grid."""
    return [
        (spec.scenario_for(base, alpha, beta, g, q), canonical_name(alpha, beta, g, q))
        for alpha, beta, g, q in spec.points()
    ]
