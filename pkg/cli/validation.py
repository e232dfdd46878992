"""
Cross-checks between the closed form, the dense and branch backends and the
master-equation oracle.

Every check records its measured value against a threshold; failures are
reported, never raised.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np

from analytic.stage1 import concurrence_stage1, rho_stage1
from cli.records import detect_sudden_death, trajectory_records
from entanglement.concurrence import (
    monogamy_residual,
    pair_concurrence,
    trajectory_concurrences,
)
from evolution.branches import branch_run
from evolution.models import Frame, Scenario, StageKind
from evolution.runner import initial_state, run_scenario
from evolution.superoperator import stage_step
from hilbert.models import check_positivity
from hilbert.operations import mean_photon_number, partial_trace, trace_distance
from lindblad_oracle.integrator import oracle_run

logger = logging.getLogger(__name__)

QUICK_TIMES = (10.0, 20.0, 30.0)
STATE_TOLERANCE = 1e-8
ORACLE_TOLERANCE = 1e-6
LANDMARK_TOLERANCE = 1e-6
CONCURRENCE_TOLERANCE = 1e-6
SUPPRESSION_RATIO = 0.9
SEPARABILITY_TOLERANCE = 1e-10
SURVIVING_CONCURRENCE = 0.1
MIN_SPEEDUP = 10.0


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    elapsed: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (threshold {self.threshold:.1e}, {self.elapsed:.1f}s)"


@dataclass
class ValidationReport:
    level: str
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        failed = sum(1 for c in self.checks if not c.passed)
        summary = f"{self.level} validation: {len(self.checks) - failed} passed, {failed} failed"
        return [c.line() for c in self.checks] + [summary]


def strict_truncation(amplitude):
    """Truncation whose coherent tail is far below the state tolerances."""
    a = abs(amplitude)
    return math.ceil(a**2 + 12 * a + 8)


def strict_scenario(alpha, beta, g, q, **kwargs) -> Scenario:
    scenario = Scenario(alpha=alpha, beta=beta, **kwargs).with_damping(g, q)
    return scenario.with_truncations(strict_truncation(alpha), strict_truncation(beta))


def _run_check(report, name, threshold, measure: Callable[[], float], upper=True):
    """
    Time ``measure`` and record it; ``upper`` checks value < threshold,
    otherwise value >= threshold.
    """
    start = time.perf_counter()
    try:
        value = float(measure())
        passed = value < threshold if upper else value >= threshold
    except Exception as e:
        logger.error(f"Check {name} raised {type(e).__name__}: {e}")
        value, passed = math.nan, False
    check = Check(name, passed, value, threshold, time.perf_counter() - start)
    logger.info(check.line())
    report.checks.append(check)
    return check


def _max_distance(first, second):
    return max(
        trace_distance(first.density(i), second.density(i)) for i in range(len(first))
    )


def _quick_checks(report):
    scenario = strict_scenario(1.0, 0.5, 0.05, 0.05)
    times = np.array(QUICK_TIMES)
    dense = run_scenario(scenario, times)

    _run_check(
        report,
        "stage-1 closed form vs dense",
        STATE_TOLERANCE,
        lambda: max(
            trace_distance(rho_stage1(t, scenario), dense.density(i)) for i, t in enumerate(times)
        ),
    )
    _run_check(
        report,
        "stage-1 branch vs dense",
        STATE_TOLERANCE,
        lambda: _max_distance(branch_run(scenario, times), dense),
    )

    def wootters_vs_closed_form():
        worst = 0.0
        for i, t in enumerate(times):
            value, _ = pair_concurrence(partial_trace(dense.density(i), [0, 1]))
            worst = max(worst, abs(value - concurrence_stage1(t, scenario)))
        return worst

    _run_check(report, "stage-1 Wootters vs closed form", CONCURRENCE_TOLERANCE, wootters_vs_closed_form)

    ideal = Scenario(alpha=1.0)
    peak_time = math.pi / (2 * ideal.omega_1)
    _run_check(
        report,
        "concurrence peak at omega_1 t = pi/2",
        LANDMARK_TOLERANCE,
        lambda: abs(concurrence_stage1(peak_time, ideal) - math.sqrt(1 - math.exp(-4))),
    )
    _run_check(
        report,
        "concurrence zero at omega_1 t = pi",
        LANDMARK_TOLERANCE,
        lambda: concurrence_stage1(2 * peak_time, ideal),
    )
    _run_check(
        report,
        "snapshot positivity",
        -1e-9,
        lambda: min(check_positivity(rho.entries) for rho in dense.densities()),
        upper=False,
    )


def _grid_checks(report):
    amplitudes = (0.5, 1.0, 2.0)
    ratios = (0.0, 0.05, 0.5, 1.0)
    base = Scenario()
    times = np.linspace(0.0, base.total_duration, 5)

    def branch_vs_dense():
        worst = 0.0
        for alpha in amplitudes:
            for beta in amplitudes:
                for g in ratios:
                    for q in ratios:
                        scenario = strict_scenario(alpha, beta, g, q)
                        distance = _max_distance(
                            branch_run(scenario, times), run_scenario(scenario, times)
                        )
                        worst = max(worst, distance)
        return worst

    _run_check(report, "branch vs dense over the grid", STATE_TOLERANCE, branch_vs_dense)


def _oracle_checks(report):
    scenario = Scenario(alpha=1.0, beta=1.0).with_damping(0.05, 0.05).with_truncations(20, 20)
    times = np.linspace(0.0, scenario.total_duration, 10)
    _run_check(
        report,
        "dense vs oracle",
        ORACLE_TOLERANCE,
        lambda: _max_distance(run_scenario(scenario, times), oracle_run(scenario, times)),
    )


def _invariant_checks(report):
    scenario = strict_scenario(0.5, 0.5, 0.05, 0.05)
    times = np.linspace(0.0, scenario.total_duration, 7)

    def frame_invariance():
        rotating = trajectory_concurrences(run_scenario(scenario, times))
        lab = scenario.model_copy(update={"frame": Frame.LAB})
        return np.max(np.abs(trajectory_concurrences(run_scenario(lab, times)) - rotating))

    def semigroup():
        worst = 0.0
        for stage in StageKind:
            rho = initial_state(scenario)
            duration = stage.duration(scenario)
            once = stage_step(rho, stage, duration, scenario)
            split = stage_step(rho, stage, 0.4 * duration, scenario)
            split = stage_step(split, stage, 0.6 * duration, scenario, 0.4 * duration)
            worst = max(worst, trace_distance(once, split))
        return worst

    def monogamy():
        ideal = strict_scenario(0.5, 0.5, 0.0, 0.0)
        trajectory = run_scenario(ideal, times)
        residuals = [monogamy_residual(rho) for rho in trajectory.densities()]
        return min(r for r in residuals if r is not None)

    def photon_decay():
        rho = initial_state(scenario)
        duration = StageKind.FREE1.duration(scenario)
        decayed = stage_step(rho, StageKind.FREE1, duration, scenario)
        worst = 0.0
        for field, gamma in zip((1, 2), scenario.gammas):
            expected = mean_photon_number(rho, field) * math.exp(-2 * gamma * duration)
            worst = max(worst, abs(mean_photon_number(decayed, field) / expected - 1))
        return worst

    _run_check(report, "frame invariance of concurrences", 1e-8, frame_invariance)
    _run_check(report, "stage semigroup", 1e-9, semigroup)
    _run_check(report, "monogamy residual", -1e-6, monogamy, upper=False)
    _run_check(report, "mean photon decay", 1e-8, photon_decay)


def _records(scenario, times):
    return trajectory_records(branch_run(scenario, times))


def _column_max(records, column, until=None):
    return max(r.value(column) for r in records if until is None or r.t <= until)


def _ratio(numerator, denominator):
    if denominator < 1e-12:
        raise ValueError(f"Reference maximum {denominator:.3e} is too small for a ratio")
    return numerator / denominator


def _qualitative_checks(report):
    """
    Damping trends of the pairwise concurrences.

    Field 2 only ever couples to atom-diagonal maps, so tracing the atom
    leaves a mixture of product states of the two fields: C_F1F2 vanishes
    for every parameter set and the trends live in C_AF1 and C_AF2.
    """
    base = Scenario()
    times = np.linspace(0.0, base.total_duration, 181)
    first_cavity_end = base.stage_times[1]
    second_cavity_start = base.stage_times[4]

    ideal = _records(base, times)
    lossy_second = _records(base.with_damping(0.0, 1.0), times)
    lossy_first = _records(base.with_damping(1.0, 0.0), times)

    def fields_separable():
        return max(
            _column_max(records, "C_F1F2") for records in (ideal, lossy_second, lossy_first)
        )

    def second_cavity_damping():
        return _ratio(_column_max(lossy_second, "C_AF2"), _column_max(ideal, "C_AF2"))

    def second_cavity_leaves_first_pair():
        return max(
            abs(lossy.C_AF1 - reference.C_AF1)
            for lossy, reference in zip(lossy_second, ideal)
            if reference.t <= second_cavity_start
        )

    def first_cavity_damping():
        return _ratio(_column_max(lossy_first, "C_AF1"), _column_max(ideal, "C_AF1"))

    def diagonal_ordering():
        violations = 0.0
        for amplitude in (0.5, 1.0, 2.0):
            scenario = base.model_copy(
                update={"alpha": complex(amplitude), "beta": complex(amplitude)}
            )
            maxima = [
                _column_max(
                    _records(scenario.with_damping(r, r), times), "C_AF1", first_cavity_end
                )
                for r in (0.0, 0.05, 0.5, 1.0)
            ]
            violations = max(violations, max(0.0, float(np.max(np.diff(maxima)))))
        return violations

    def first_pair_survives():
        # C_AF1 stays finite through a lossy second cavity: no sudden death
        worst = math.inf
        for beta in (1.0, 2.0):
            for q in (0.5, 1.0):
                scenario = base.model_copy(update={"beta": complex(beta)}).with_damping(0.0, q)
                records = _records(scenario, times)
                if detect_sudden_death(records, "C_AF1"):
                    return 0.0
                later = [r.C_AF1 for r in records if r.t > first_cavity_end]
                worst = min(worst, min(later))
        return worst

    _run_check(report, "field-field concurrence vanishes", SEPARABILITY_TOLERANCE, fields_separable)
    _run_check(report, "lossy second cavity lowers max C_AF2", SUPPRESSION_RATIO, second_cavity_damping)
    _run_check(
        report,
        "lossy second cavity leaves C_AF1 before it",
        STATE_TOLERANCE,
        second_cavity_leaves_first_pair,
    )
    _run_check(report, "lossy first cavity lowers max C_AF1", SUPPRESSION_RATIO, first_cavity_damping)
    _run_check(report, "first-cavity C_AF1 maximum decreases along g = q", 1e-9, diagonal_ordering)
    _run_check(
        report,
        "C_AF1 survives a lossy second cavity",
        SURVIVING_CONCURRENCE,
        first_pair_survives,
        upper=False,
    )


def _speed_check(report):
    scenario = Scenario().with_truncations(25, 25)
    times = np.linspace(0.0, scenario.total_duration, 10)

    def speedup():
        start = time.perf_counter()
        run_scenario(scenario, times)
        dense = time.perf_counter() - start
        start = time.perf_counter()
        branch_run(scenario, times)
        branch = time.perf_counter() - start
        return dense / max(branch, 1e-9)

    _run_check(report, "branch speed-up over dense at N=25", MIN_SPEEDUP, speedup, upper=False)


def validate(level="quick") -> ValidationReport:
    """
    Run the validation suite.

    :param level: ``quick`` (first-cavity checks, seconds) or ``full``
        (adds grid, oracle, invariant, qualitative and speed checks).
    """
    if level not in ("quick", "full"):
        raise ValueError(f"Unknown validation level '{level}'")
    report = ValidationReport(level)
    _quick_checks(report)
    if level == "full":
        _grid_checks(report)
        _oracle_checks(report)
        _invariant_checks(report)
        _qualitative_checks(report)
        _speed_check(report)
    return report
