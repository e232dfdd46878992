"""
Named parameter grids reproducing the published curves.

fig2 is the long single-cavity run served by the closed form; the other
presets simulate the full five-stage passage.
"""

import logging
import os

import numpy as np

from analytic.stage1 import concurrence_stage1, phase_space_trajectory, stage1_purity
from cavity_qed import settings
from cli.export import canonical_name, write_phase_space, write_records
from cli.models import ConcurrenceRecord, SweepPointResult, SweepSpec
from cli.sweeps import execute
from evolution.models import Backend, Scenario

logger = logging.getLogger(__name__)

DAMPING_RATIOS = (0.0, 0.05, 0.5, 1.0)
AMPLITUDES = (0.5, 1.0, 2.0)

SINGLE_CAVITY_DURATION = 1000.0
SINGLE_CAVITY_SAMPLES = 2001
PHASE_SPACE_AMPLITUDE = 1.0
PHASE_SPACE_GAMMAS = (0.0, 1.25e-3)


def _grid(name):
    """(alpha, beta, g, q) tuples of a simulation preset."""
    if name == "fig4":
        return [(0.5, 0.5, 0.0, q) for q in DAMPING_RATIOS]
    if name == "fig5":
        return [(0.5, 0.5, g, 0.0) for g in DAMPING_RATIOS]
    if name == "fig6":
        return [(a, a, r, r) for a in AMPLITUDES for r in DAMPING_RATIOS]
    if name == "fig7":
        return [(0.5, b, 0.0, q) for b in AMPLITUDES for q in DAMPING_RATIOS]
    if name == "full":
        return [
            (a, b, g, q)
            for a in AMPLITUDES
            for b in AMPLITUDES
            for g in DAMPING_RATIOS
            for q in DAMPING_RATIOS
        ]
    raise KeyError(name)


PRESETS = ("fig2", "fig4", "fig5", "fig6", "fig7", "full")


def single_cavity_scenario(alpha, g=0.0, gamma_1=None):
    scenario = Scenario(
        alpha=alpha,
        stage_durations=(SINGLE_CAVITY_DURATION, 0.0, 0.0, 0.0, 0.0),
    )
    if gamma_1 is not None:
        return scenario.model_copy(update={"gamma_1": gamma_1})
    return scenario.with_damping(g, 0.0)


def single_cavity_records(scenario: Scenario, times):
    """Closed-form records; field 2 stays a product during the first cavity."""
    return [
        ConcurrenceRecord(
            t=float(t),
            C_AF1=concurrence_stage1(t, scenario),
            C_AF2=0.0,
            C_F1F2=0.0,
            purity=stage1_purity(t, scenario),
        )
        for t in times
    ]


def _run_single_cavity(out_dir):
    times = np.linspace(0.0, SINGLE_CAVITY_DURATION, SINGLE_CAVITY_SAMPLES)
    results = []
    for alpha in AMPLITUDES:
        for g in DAMPING_RATIOS:
            scenario = single_cavity_scenario(alpha, g)
            records = single_cavity_records(scenario, times)
            path = write_records(
                os.path.join(out_dir, canonical_name(alpha, scenario.beta, g, 0.0)), records
            )
            results.append(
                SweepPointResult(
                    path=path,
                    samples=len(records),
                    flagged=0,
                    max_concurrences=(max(r.C_AF1 for r in records), 0.0, 0.0),
                    truncations=scenario.truncations,
                )
            )
    for gamma_1 in PHASE_SPACE_GAMMAS:
        scenario = single_cavity_scenario(PHASE_SPACE_AMPLITUDE, gamma_1=gamma_1)
        name = f"phase_space_a{PHASE_SPACE_AMPLITUDE:g}_gamma{gamma_1:g}.csv"
        write_phase_space(os.path.join(out_dir, name), phase_space_trajectory(times, scenario))
    return results


def run_preset(name, out_dir=None, backend=None, workers=1, use_celery=False, converge=False):
    """
    Write the CSV files of preset ``name`` under ``out_dir/name``.

    :param backend: Simulation backend; presets default to the branch backend.
    :raises KeyError: for an unknown preset.
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown preset '{name}', choose one of {', '.join(PRESETS)}")
    out_dir = os.path.join(out_dir or settings.OUTPUT_DIR, name)
    logger.info(f"Running preset {name} into {out_dir}")
    if name == "fig2":
        return _run_single_cavity(out_dir)

    spec = SweepSpec(backend=Backend(backend) if backend else Backend.BRANCH)
    base = Scenario()
    jobs = [
        (spec.scenario_for(base, complex(a), complex(b), g, q), canonical_name(a, b, g, q))
        for a, b, g, q in _grid(name)
    ]
    return execute(jobs, spec, out_dir, workers=workers, use_celery=use_celery, converge=converge)
