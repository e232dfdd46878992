"""
Pairwise concurrence of the atom and the two fields.

Each field's reduced state lives in the span of two coherent branches, so a
pair reduction is projected onto the top-2 eigenvectors of every field
party and measured with the Wootters formula.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from cavity_qed import settings
from cavity_qed.errors import SupportDeficient
from evolution.models import BranchState, Trajectory
from hilbert.models import DensityMatrix, SubsystemLayout, hermitize
from hilbert.operations import partial_trace, purity

logger = logging.getLogger(__name__)

# sigma_y (x) sigma_y
SPIN_FLIP = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex
)

PAIRS = {
    "AF1": (0, 1),
    "AF2": (0, 2),
    "F1F2": (1, 2),
}


@dataclass(frozen=True)
class EffectiveQubitReduction:
    two_qubit_state: DensityMatrix
    support_bases: Tuple[np.ndarray, np.ndarray]
    discarded_weight: float
    support_deficient: bool = False

    @property
    def flagged(self):
        return self.discarded_weight >= settings.DISCARDED_FLAG

    def embedded(self) -> np.ndarray:
        """The two-qubit state mapped back into the original pair space."""
        projector = np.kron(*self.support_bases)
        return projector @ self.two_qubit_state.entries @ projector.conj().T


@dataclass(frozen=True)
class PairwiseConcurrences:
    atom_field1: float
    atom_field2: float
    field1_field2: float
    discarded_weight: float = 0.0
    flags: Tuple[str, ...] = ()

    @property
    def values(self):
        return (self.atom_field1, self.atom_field2, self.field1_field2)


def _party_support(rho_party: DensityMatrix, tol):
    """Top-2 eigenvectors (descending) and whether the second one is empty."""
    if rho_party.dim < 2:
        raise ValueError("Every party needs at least two levels")
    if rho_party.dim == 2:
        eigenvalues = np.linalg.eigvalsh(rho_party.entries)
        return np.eye(2, dtype=complex), eigenvalues[0] < tol
    eigenvalues, vectors = np.linalg.eigh(rho_party.entries)
    return vectors[:, [-1, -2]], eigenvalues[-2] < tol


def effective_two_qubit(
    rho_pair: DensityMatrix, tol=None, strict=False
) -> EffectiveQubitReduction:
    """
    Project a two-party state onto the product of each party's dominant
    two-dimensional support.

    :param rho_pair: Reduced state of two subsystems.
    :param tol: Eigenvalue below which a party's second support vector is
        considered empty; defaults to ``settings.SUPPORT_TOLERANCE``.
    :param strict: Raise instead of flagging a party with a single support vector.
    :return: The renormalized 4x4 state with the weight left outside.
    :raises SupportDeficient: in strict mode, when a party has rank < 2.
    """
    tol = settings.SUPPORT_TOLERANCE if tol is None else tol
    if len(rho_pair.layout) != 2:
        raise ValueError(f"Expected a two-party state, got {rho_pair.layout}")

    bases = []
    deficient = False
    for party in (0, 1):
        basis, empty = _party_support(partial_trace(rho_pair, [party]), tol)
        if empty and strict:
            raise SupportDeficient(
                f"Party {rho_pair.layout.labels[party]} has a single support vector"
            )
        bases.append(basis)
        deficient = deficient or bool(empty)

    projector = np.kron(bases[0], bases[1])
    projected = hermitize(projector.conj().T @ rho_pair.entries @ projector)
    kept = float(np.trace(projected).real)
    discarded = max(0.0, 1.0 - kept)
    if discarded > settings.DISCARDED_WARNING:
        logger.warning(
            f"Effective qubit reduction of {rho_pair.layout.labels} discards "
            f"{discarded:.3e} of the weight"
        )

    layout = SubsystemLayout((2, 2), rho_pair.layout.labels)
    return EffectiveQubitReduction(
        two_qubit_state=DensityMatrix(layout, projected / kept),
        support_bases=(bases[0], bases[1]),
        discarded_weight=discarded,
        support_deficient=deficient,
    )


def _positive_root(entries):
    eigenvalues, vectors = np.linalg.eigh(entries)
    cutoff = 1e-12 * max(eigenvalues[-1], 0.0)
    roots = np.sqrt(np.where(eigenvalues > cutoff, eigenvalues, 0.0))
    return (vectors * roots) @ vectors.conj().T


def wootters_concurrence(rho: Union[DensityMatrix, np.ndarray]) -> float:
    """
    C = max(0, l1 - l2 - l3 - l4) with l_i the decreasing square roots of the
    eigenvalues of rho (sy sy) rho* (sy sy).

    The l_i are taken as singular values of sqrt(rho) (sy sy) sqrt(rho)*,
    which avoids a non-Hermitian eigenproblem.
    """
    entries = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if entries.shape != (4, 4):
        raise ValueError(f"Wootters concurrence needs a 4x4 state, got {entries.shape}")
    root = _positive_root(hermitize(entries))
    values = np.linalg.svd(root @ SPIN_FLIP @ root.conj(), compute_uv=False)
    concurrence = values[0] - values[1] - values[2] - values[3]
    return float(min(1.0, max(0.0, concurrence)))


def tangle(rho_a: Union[DensityMatrix, np.ndarray]) -> float:
    """4 det rho_A of a single qubit."""
    entries = rho_a.entries if isinstance(rho_a, DensityMatrix) else np.asarray(rho_a)
    return float(max(0.0, 4 * np.linalg.det(entries).real))


def pair_concurrence(rho_pair: DensityMatrix, tol=None):
    """(concurrence, reduction) of one pair; deficient supports give 0."""
    reduction = effective_two_qubit(rho_pair, tol)
    if reduction.support_deficient:
        return 0.0, reduction
    return wootters_concurrence(reduction.two_qubit_state), reduction


def pairwise_from_reductions(rho_af1, rho_af2, rho_f1f2, tol=None) -> PairwiseConcurrences:
    concurrences = []
    discarded = 0.0
    flags = []
    for name, rho_pair in zip(PAIRS, (rho_af1, rho_af2, rho_f1f2)):
        value, reduction = pair_concurrence(rho_pair, tol)
        concurrences.append(value)
        discarded = max(discarded, reduction.discarded_weight)
        if reduction.flagged:
            flags.append(f"discarded_{name}")
    return PairwiseConcurrences(*concurrences, discarded_weight=discarded, flags=tuple(flags))


def _reductions(state, truncations=None, tolerance=None):
    if isinstance(state, BranchState):
        if truncations is None:
            raise ValueError("Branch states need truncations to be reduced")
        return [state.reduced(keep, truncations, tolerance) for keep in PAIRS.values()]
    return [partial_trace(state, keep) for keep in PAIRS.values()]


def pairwise_concurrences(state, truncations=None, tol=None) -> PairwiseConcurrences:
    """
    (C_AF1, C_AF2, C_F1F2) of a full (atom, field1, field2) state.

    :param state: Dense :class:`DensityMatrix` or :class:`BranchState`.
    :param truncations: (N1, N2) for densifying branch reductions.
    """
    return pairwise_from_reductions(*_reductions(state, truncations), tol=tol)


def global_purity(state) -> float:
    if isinstance(state, BranchState):
        return state.purity()
    return purity(state)


def monogamy_residual(state, truncations=None, pairwise: Optional[PairwiseConcurrences] = None):
    """
    tau_A - C_AF1^2 - C_AF2^2 for a globally pure state, ``None`` otherwise.
    """
    if global_purity(state) < settings.MONOGAMY_PURITY:
        return None
    if pairwise is None:
        pairwise = pairwise_concurrences(state, truncations)
    if isinstance(state, BranchState):
        atom = state.reduced([0], truncations)
    else:
        atom = partial_trace(state, [0])
    return tangle(atom) - pairwise.atom_field1**2 - pairwise.atom_field2**2


def trajectory_pairwise(trajectory: Trajectory):
    truncations = trajectory.truncations
    tolerance = trajectory.scenario.tail_tolerance
    return [
        pairwise_from_reductions(*_reductions(snapshot, truncations, tolerance))
        for snapshot in trajectory.snapshots
    ]


def trajectory_concurrences(trajectory: Trajectory) -> np.ndarray:
    """Concurrences of every snapshot as an array of shape (samples, 3)."""
    return np.array([p.values for p in trajectory_pairwise(trajectory)], dtype=float)
