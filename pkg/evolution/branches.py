"""
Coherent-branch backend.

Every stage map sends a coherent dyad |z><w| to a multiple of another
coherent dyad, so a state that starts as atom (x) coherent (x) coherent
stays a short list of weighted dyads:

* jump factor:     |z><w| -> exp(F z conj(w)) |z><w|
* damping factor:  |z><w| -> exp(-(|z|^2 + |w|^2)(1 - e^{-2 gamma tau})/2) |z e^{-gamma tau}><w e^{-gamma tau}|
* dispersive step: labels rotate by e^{-i sigma omega tau}, |e> picks up e^{-i omega tau}
* Ramsey rotation: mixes the atomic dyads, labels untouched

The cost is independent of the Fock truncation until a state is densified.
"""

import logging

import numpy as np

from cavity_qed.errors import UnsupportedInitialState
from evolution.models import (
    EXCITED,
    SIGMA_Z,
    Backend,
    BranchState,
    Frame,
    Scenario,
    StageKind,
    StagePlan,
    Trajectory,
)
from evolution.runner import advance, atomic_superposition, check_sample_times
from evolution.superoperator import jump_coefficient, ramsey_rotation
from hilbert.models import DensityMatrix
from hilbert.operations import (
    annihilation,
    coherent_state,
    partial_trace,
    purity,
    tensor_product,
    trace_distance,
)

logger = logging.getLogger(__name__)


def initial_branches(scenario: Scenario) -> BranchState:
    atom = atomic_superposition(scenario.phi).to_density().entries
    return BranchState.product(atom, scenario.alpha, scenario.beta)


def branch_state_from_density(rho: DensityMatrix, tolerance=1e-9) -> BranchState:
    """
    Recognize rho_atom (x) |alpha><alpha| (x) |beta><beta|.

    :raises UnsupportedInitialState: for anything outside that family.
    """
    if len(rho.layout) != 3 or rho.layout.dims[0] != 2:
        raise UnsupportedInitialState(f"Expected an (atom, field1, field2) layout, got {rho.layout}")
    atom = partial_trace(rho, [0])
    amplitudes = []
    fields = []
    for field in (1, 2):
        reduced = partial_trace(rho, [field])
        truncation = reduced.dim - 1
        amplitude = complex(np.trace(annihilation(truncation) @ reduced.entries))
        try:
            expected = coherent_state(amplitude, truncation).to_density()
        except Exception as e:
            raise UnsupportedInitialState(f"Field {field} is not a coherent state: {e}")
        if purity(reduced) < 1 - tolerance or trace_distance(reduced, expected) > tolerance:
            raise UnsupportedInitialState(f"Field {field} is not a coherent state")
        amplitudes.append(amplitude)
        fields.append(reduced)

    product = tensor_product([atom] + fields)
    if trace_distance(rho, DensityMatrix(rho.layout, product.entries)) > tolerance:
        raise UnsupportedInitialState("State is not a product of atom and fields")
    return BranchState.product(atom.entries, *amplitudes)


def _merge(atom_ket, atom_bra, weights, ket_labels, bra_labels):
    """Sum branches with identical atomic dyad and labels; drop exact zeros."""
    merged = {}
    for i in range(len(weights)):
        if weights[i] == 0:
            continue
        key = (
            int(atom_ket[i]),
            int(atom_bra[i]),
            *(complex(v) for v in ket_labels[i]),
            *(complex(v) for v in bra_labels[i]),
        )
        merged[key] = merged.get(key, 0) + weights[i]
    if not merged:
        raise ValueError("Branch state has no remaining weight")
    keys = list(merged)
    return BranchState(
        atom_ket=[k[0] for k in keys],
        atom_bra=[k[1] for k in keys],
        weights=[merged[k] for k in keys],
        ket_labels=[k[2:4] for k in keys],
        bra_labels=[k[4:6] for k in keys],
    )


def _rotate_atom(state: BranchState, rotation):
    count = len(state)
    atom_ket = np.repeat(np.arange(2), 2 * count).reshape(2, 2, count)
    atom_bra = np.tile(np.repeat(np.arange(2), count), 2).reshape(2, 2, count)
    # |s><s'| picks up R[s, r] w conj(R[s', r']) from every source dyad |r><r'|
    weights = (
        rotation[:, state.atom_ket][:, None, :]
        * np.conj(rotation[:, state.atom_bra])[None, :, :]
        * state.weights[None, None, :]
    )
    return _merge(
        atom_ket.reshape(-1),
        atom_bra.reshape(-1),
        weights.reshape(-1),
        np.tile(state.ket_labels, (4, 1)),
        np.tile(state.bra_labels, (4, 1)),
    )


def advance_branches(state: BranchState, stage: StageKind, tau, scenario: Scenario, elapsed=0.0):
    """Branch counterpart of ``stage_step``: the same factors, label by label."""
    s, s_bra = state.atom_ket, state.atom_bra
    lam = SIGMA_Z[s] - SIGMA_Z[s_bra]
    weights = state.weights.copy()
    kets = state.ket_labels.copy()
    bras = state.bra_labels.copy()

    for column, gamma in enumerate(scenario.gammas):
        omega = stage.coupling(scenario, column + 1)
        z, w = kets[:, column], bras[:, column]
        if gamma != 0:
            coefficient = jump_coefficient(gamma, omega, lam, tau)
            loss = -np.expm1(-2 * gamma * tau)
            weights = weights * np.exp(
                coefficient * z * np.conj(w) - 0.5 * (np.abs(z) ** 2 + np.abs(w) ** 2) * loss
            )
            z, w = z * np.exp(-gamma * tau), w * np.exp(-gamma * tau)
        if omega != 0:
            z = z * np.exp(-1j * SIGMA_Z[s] * omega * tau)
            w = w * np.exp(-1j * SIGMA_Z[s_bra] * omega * tau)
            weights = weights * np.exp(-1j * omega * tau * ((s == EXCITED) * 1.0 - (s_bra == EXCITED)))
        if scenario.frame is Frame.LAB:
            rotation = np.exp(-1j * scenario.cavity_frequencies[column] * tau)
            z, w = z * rotation, w * rotation
        kets[:, column], bras[:, column] = z, w

    state = BranchState(s, s_bra, weights, kets, bras)
    if stage is StageKind.RAMSEY:
        state = _rotate_atom(state, ramsey_rotation(scenario, tau, elapsed))
    if scenario.frame is Frame.LAB:
        # free atomic phase comes after the rotation
        lam = SIGMA_Z[state.atom_ket] - SIGMA_Z[state.atom_bra]
        state = BranchState(
            state.atom_ket,
            state.atom_bra,
            state.weights * np.exp(-0.5j * scenario.omega_a * tau * lam),
            state.ket_labels,
            state.bra_labels,
        )
    return state


def branch_run(scenario: Scenario, sample_times, initial=None) -> Trajectory:
    """
    Evolve the coherent-branch representation through the five stages.

    :param initial: Optional :class:`BranchState` or product
        :class:`DensityMatrix`; defaults to the scenario's initial state.
    :raises UnsupportedInitialState: if ``initial`` is not
        atom (x) coherent (x) coherent.
    """
    plan = StagePlan.from_scenario(scenario)
    times = check_sample_times(sample_times, plan)
    if initial is None:
        state = initial_branches(scenario)
    elif isinstance(initial, BranchState):
        state = initial
    elif isinstance(initial, DensityMatrix):
        state = branch_state_from_density(initial)
    else:
        raise UnsupportedInitialState(f"Cannot build branches from {type(initial).__name__}")
    logger.info(f"Branch run: {len(state)} initial branches, {times.size} samples")

    def step(branches, stage, tau, elapsed):
        return advance_branches(branches, stage, tau, scenario, elapsed)

    snapshots = []
    current = 0.0
    for t in times:
        state = advance(state, plan, current, t, step)
        current = t
        snapshots.append(state)

    return Trajectory(
        times=times,
        stages=tuple(plan.stage_at(t) for t in times),
        snapshots=tuple(snapshots),
        backend=Backend.BRANCH,
        scenario=scenario,
    )
