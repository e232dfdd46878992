"""
Closed-form state during the first cavity crossing.

While the atom is inside cavity 1 the second field only decays, and the
atom-field-1 state stays in the span of two coherent branches:

    rho(t) = 1/2 { |e,a_e><e,a_e| + x |e,a_e><g,a_g| + h.c. + |g,a_g><g,a_g| } (x) |b1><b1|

with a_e = alpha exp(-(gamma_1 + i omega_1) t), a_g = alpha exp(-(gamma_1 - i omega_1) t)
and the coherence factor x(t) = exp(i phi/2 + |alpha|^2 f_x(t) - i omega_1 t).
"""

from dataclasses import dataclass

import numpy as np

from evolution.models import Frame, Scenario, StageKind
from evolution.superoperator import expm1_ratio
from hilbert.models import DensityMatrix, hermitize
from hilbert.operations import coherent_overlap, coherent_state


@dataclass(frozen=True)
class Stage1Snapshot:
    t: float
    alpha_e: complex
    alpha_g: complex
    beta_1: complex
    x: complex
    concurrence: float

    @property
    def chord(self):
        """Phase-space distance between the two field-1 branches."""
        return abs(self.alpha_e - self.alpha_g)


def _check_time(t):
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")


def branch_amplitudes(t, scenario: Scenario):
    """
    Coherent labels (alpha_e, alpha_g, beta_1) at time t inside cavity 1.

    In the lab frame both fields also rotate at their cavity frequencies.
    """
    _check_time(t)
    gamma_1, gamma_2 = scenario.gammas
    omega_1 = scenario.omega_1
    alpha_e = scenario.alpha * np.exp(-(gamma_1 + 1j * omega_1) * t)
    alpha_g = scenario.alpha * np.exp(-(gamma_1 - 1j * omega_1) * t)
    beta_1 = scenario.beta * np.exp(-gamma_2 * t)
    if scenario.frame is Frame.LAB:
        rotation_1 = np.exp(-1j * scenario.omega_tilde_1 * t)
        alpha_e, alpha_g = alpha_e * rotation_1, alpha_g * rotation_1
        beta_1 = beta_1 * np.exp(-1j * scenario.omega_tilde_2 * t)
    return complex(alpha_e), complex(alpha_g), complex(beta_1)


def coherence_exponent(t, scenario: Scenario):
    """
    f_x(t) = gamma/(gamma + i omega)(1 - e^{-2(gamma + i omega)t}) - (1 - e^{-2 gamma t}).

    Evaluated through expm1_ratio so gamma + i omega -> 0 stays regular.
    """
    gamma, omega = scenario.gamma_1, scenario.omega_1
    exchange = 2 * gamma * t * expm1_ratio(2 * (gamma + 1j * omega) * t)
    return complex(exchange + np.expm1(-2 * gamma * t))


def coherence_factor(t, scenario: Scenario):
    """Coefficient x(t) of the |e><g| block (times 2)."""
    _check_time(t)
    phase = 0.5 * scenario.phi - scenario.omega_1 * t
    if scenario.frame is Frame.LAB:
        phase -= scenario.omega_a * t
    exponent = abs(scenario.alpha) ** 2 * coherence_exponent(t, scenario) + 1j * phase
    return complex(np.exp(exponent))


def concurrence_stage1(t, scenario: Scenario):
    """C = |x| sqrt(1 - |<a_g|a_e>|^2) with the exact coherent overlap."""
    alpha_e, alpha_g, _ = branch_amplitudes(t, scenario)
    overlap = abs(coherent_overlap(alpha_g, alpha_e)) ** 2
    value = abs(coherence_factor(t, scenario)) * np.sqrt(max(0.0, 1 - overlap))
    return float(min(1.0, value))


def stage1_snapshot(t, scenario: Scenario) -> Stage1Snapshot:
    alpha_e, alpha_g, beta_1 = branch_amplitudes(t, scenario)
    return Stage1Snapshot(
        t=float(t),
        alpha_e=alpha_e,
        alpha_g=alpha_g,
        beta_1=beta_1,
        x=coherence_factor(t, scenario),
        concurrence=concurrence_stage1(t, scenario),
    )


def stage1_purity(t, scenario: Scenario):
    """Tr rho^2 = (1 + |x|^2) / 2."""
    return 0.5 * (1 + abs(coherence_factor(t, scenario)) ** 2)


def decoherence_envelope(t, scenario: Scenario):
    """Dominant decay of |x|: exp(-|alpha|^2 (1 - e^{-2 gamma_1 t}))."""
    _check_time(t)
    return float(np.exp(abs(scenario.alpha) ** 2 * np.expm1(-2 * scenario.gamma_1 * t)))


def rho_stage1(t, scenario: Scenario) -> DensityMatrix:
    """
    Dense state at time t inside cavity 1, on the scenario truncations.

    :raises ValueError: if t lies outside the first stage.
    :raises TruncationTooSmall: if a label does not fit the truncation.
    """
    duration = StageKind.CAVITY1.duration(scenario)
    _check_time(t)
    if t > duration * (1 + 1e-12):
        raise ValueError(f"t={t} is past the first cavity (ends at {duration})")

    snapshot = stage1_snapshot(t, scenario)
    truncation_1, truncation_2 = scenario.truncations
    tolerance = scenario.tail_tolerance
    branch_e = np.kron([1.0, 0.0], coherent_state(snapshot.alpha_e, truncation_1, tolerance).amplitudes)
    branch_g = np.kron([0.0, 1.0], coherent_state(snapshot.alpha_g, truncation_1, tolerance).amplitudes)
    atom_field = 0.5 * (
        np.outer(branch_e, branch_e.conj())
        + snapshot.x * np.outer(branch_e, branch_g.conj())
        + np.conj(snapshot.x) * np.outer(branch_g, branch_e.conj())
        + np.outer(branch_g, branch_g.conj())
    )
    field_2 = coherent_state(snapshot.beta_1, truncation_2, tolerance).to_density().entries
    return DensityMatrix(scenario.layout, hermitize(np.kron(atom_field, field_2)))


def phase_space_trajectory(times, scenario: Scenario) -> np.ndarray:
    """
    Rows (t, Re a_e, Im a_e, Re a_g, Im a_g, |a_e - a_g|) in the frame
    rotating with cavity 1.
    """
    rotating = scenario.model_copy(update={"frame": Frame.ROTATING})
    rows = []
    for t in np.asarray(times, dtype=float):
        alpha_e, alpha_g, _ = branch_amplitudes(t, rotating)
        rows.append(
            (t, alpha_e.real, alpha_e.imag, alpha_g.real, alpha_g.imag, abs(alpha_e - alpha_g))
        )
    return np.array(rows, dtype=float).reshape(-1, 6)
