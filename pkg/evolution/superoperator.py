"""
Exact stage superoperators.

Within a stage the master equation propagator factorizes into

    rho -> U [ prod_i exp(-gamma_i tau (M_i + P_i)) exp(F_ik(tau) J_i) ] (rho) U^dagger

with M = n . , P = . n and J = a . a^dagger. The jump factor acts first. The
superoperator (sigma_z . - . sigma_z) is diagonal on atomic dyads |s><s'|
with eigenvalue lambda = sigma(s) - sigma(s'), so F_ik reduces to a scalar
per dyad block.
"""

import logging

import numpy as np

from cavity_qed import settings
from evolution.models import SIGMA_Z, Frame, Scenario, StageKind
from hilbert.models import DensityMatrix

logger = logging.getLogger(__name__)

# lambda of sigma_z . - . sigma_z on the atomic dyads, indexed [s, s']
DYAD_EIGENVALUES = SIGMA_Z[:, None] - SIGMA_Z[None, :]


def expm1_ratio(z):
    """(1 - exp(-z)) / z with the removable singularity at z = 0 handled."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < settings.SERIES_THRESHOLD
    safe = np.where(small, 1.0, z)
    series = 1 - z / 2 + z**2 / 6
    result = np.where(small, series, -np.expm1(-safe) / safe)
    return complex(result) if result.ndim == 0 else result


def jump_coefficient(gamma, omega, lam, tau):
    """
    Block scalar F = 2 gamma (1 - exp(-(2 gamma + i omega lam) tau)) / (2 gamma + i omega lam).

    Written as 2 gamma tau * expm1_ratio(z) so gamma -> 0 is regular.
    """
    z = (2 * gamma + 1j * omega * np.asarray(lam)) * tau
    return 2 * gamma * tau * expm1_ratio(z)


def dispersive_phases(omega, tau, truncation):
    """Diagonal of exp(-i tau H) for H = omega((n+1)|e><e| - n|g><g|), shape (2, N+1)."""
    n = np.arange(truncation + 1)
    return np.stack(
        [np.exp(-1j * omega * tau * (n + 1)), np.exp(1j * omega * tau * n)]
    )


def dispersive_unitary(omega, tau, truncation):
    """
    Dispersive propagator on atom (x) Fock(N) as a dense matrix.

    :param omega: Dispersive frequency Omega^2/Delta (rad/us).
    :param tau: Elapsed time (us), >= 0.
    :param truncation: Highest Fock number N.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    return np.diag(dispersive_phases(omega, tau, truncation).reshape(-1))


def ramsey_unitary(theta):
    """exp(-i theta sigma_x) in the (|e>, |g>) basis."""
    return np.array(
        [[np.cos(theta), -1j * np.sin(theta)], [-1j * np.sin(theta), np.cos(theta)]],
        dtype=complex,
    )


def ramsey_pulse_area(scenario: Scenario, tau):
    """Pulse area accrued after tau inside the Ramsey zone."""
    duration = StageKind.RAMSEY.duration(scenario)
    if duration == 0:
        return 0.0
    return scenario.ramsey_angle * tau / duration


def ramsey_rotation(scenario: Scenario, tau, elapsed=0.0):
    """
    Ramsey rotation for an interval tau starting at time ``elapsed``.

    In the lab frame the drive is phase-referenced to t0, so the rotation is
    seen through the free atomic phase accumulated up to ``elapsed``.
    """
    rotation = ramsey_unitary(ramsey_pulse_area(scenario, tau))
    if scenario.frame is Frame.LAB and elapsed:
        phase = np.exp(-0.5j * scenario.omega_a * elapsed * SIGMA_Z)
        rotation = phase[:, None] * rotation * np.conj(phase)[None, :]
    return rotation


def free_phases(scenario: Scenario, tau, truncations):
    """Diagonals of exp(-i tau H0) per subsystem; zero-point terms dropped."""
    atom = np.exp(-0.5j * scenario.omega_a * tau * SIGMA_Z)
    fields = tuple(
        np.exp(-1j * frequency * tau * np.arange(truncation + 1))
        for frequency, truncation in zip(scenario.cavity_frequencies, truncations)
    )
    return (atom,) + fields


def _field_axes(field):
    """Ket and bra axes of field 1 or 2 in the (atom, f1, f2, atom, f1, f2) tensor."""
    return field, field + 3


def _broadcast(values, axis):
    shape = [1] * 6
    shape[axis] = -1
    return np.reshape(values, shape)


def _jump(tensor, field):
    """a X a^dagger on one field of the 6-axis tensor."""
    ket, bra = _field_axes(field)
    dim = tensor.shape[ket]
    root = np.sqrt(np.arange(1, dim))
    out = np.zeros_like(tensor)
    target = [slice(None)] * 6
    source = [slice(None)] * 6
    target[ket] = target[bra] = slice(0, dim - 1)
    source[ket] = source[bra] = slice(1, dim)
    out[tuple(target)] = (
        tensor[tuple(source)] * _broadcast(root, ket) * _broadcast(root, bra)
    )
    return out


def _dyad_scalars(values):
    """Per-dyad 2x2 values broadcast over the atom ket/bra axes."""
    return np.asarray(values).reshape(2, 1, 1, 2, 1, 1)


def _apply_dissipation(tensor, stage: StageKind, tau, scenario: Scenario):
    for field, gamma in zip((1, 2), scenario.gammas):
        if gamma == 0:
            continue
        omega = stage.coupling(scenario, field)
        coefficient = _dyad_scalars(jump_coefficient(gamma, omega, DYAD_EIGENVALUES, tau))
        ket, bra = _field_axes(field)
        truncation = tensor.shape[ket] - 1

        # exp(F J) summed exactly: a^k lowers, so k <= N covers the space
        result = tensor.copy()
        term = tensor
        for k in range(1, truncation + 1):
            term = _jump(term, field) * (coefficient / k)
            result = result + term
        tensor = result

        decay = np.exp(-gamma * tau * np.arange(truncation + 1))
        tensor = tensor * _broadcast(decay, ket) * _broadcast(decay, bra)
    return tensor


def dissipative_map(rho: DensityMatrix, stage: StageKind, tau, scenario: Scenario):
    """
    Dissipative factor of the stage propagator over an interval tau.

    :raises NonPhysicalState: if the output leaves the physical state space.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    tensor = _apply_dissipation(rho.tensor(), stage, tau, scenario)
    return DensityMatrix.from_tensor(
        rho.layout, tensor, positivity_tolerance=rho.positivity_tolerance
    )


def _conjugate_diagonal(tensor, phases, ket_axis):
    return (
        tensor
        * _broadcast(phases, ket_axis)
        * _broadcast(np.conj(phases), ket_axis + 3)
    )


def _apply_unitaries(tensor, stage: StageKind, tau, scenario: Scenario, elapsed=0.0):
    for field in (1, 2):
        omega = stage.coupling(scenario, field)
        if omega == 0:
            continue
        truncation = tensor.shape[field] - 1
        phases = dispersive_phases(omega, tau, truncation)
        shape = [1] * 6
        shape[0], shape[field] = 2, truncation + 1
        ket_phase = phases.reshape(shape)
        bra_shape = [1] * 6
        bra_shape[3], bra_shape[field + 3] = 2, truncation + 1
        tensor = tensor * ket_phase * np.conj(phases).reshape(bra_shape)

    if stage is StageKind.RAMSEY:
        rotation = ramsey_rotation(scenario, tau, elapsed)
        tensor = np.einsum(
            "ab,bijdkl,cd->aijckl", rotation, tensor, rotation.conj(), optimize=True
        )

    if scenario.frame is Frame.LAB:
        truncations = (tensor.shape[1] - 1, tensor.shape[2] - 1)
        for axis, phases in enumerate(free_phases(scenario, tau, truncations)):
            tensor = _conjugate_diagonal(tensor, phases, axis)
    return tensor


def stage_step(rho: DensityMatrix, stage: StageKind, tau, scenario: Scenario, elapsed=0.0):
    """
    Advance rho by tau inside ``stage``: dissipative map, then the stage
    unitary (dispersive, Ramsey rotation or identity), then the free
    evolution when working in the lab frame.

    :param elapsed: Time since t0 at which the step starts; only the lab-frame
        Ramsey rotation depends on it.
    """
    duration = stage.duration(scenario)
    if tau < 0 or tau > duration * (1 + 1e-12) + 1e-12:
        raise ValueError(f"tau={tau} outside stage {stage.name} of length {duration}")
    if rho.layout.dims[0] != 2 or len(rho.layout) != 3:
        raise ValueError(f"stage_step needs an (atom, field1, field2) layout, got {rho.layout}")
    tensor = _apply_dissipation(rho.tensor(), stage, tau, scenario)
    tensor = _apply_unitaries(tensor, stage, tau, scenario, elapsed)
    return DensityMatrix.from_tensor(
        rho.layout, tensor, positivity_tolerance=rho.positivity_tolerance
    )
