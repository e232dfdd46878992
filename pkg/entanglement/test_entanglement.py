import numpy as np
import pytest
from scipy.stats import unitary_group

from cavity_qed.errors import SupportDeficient
from entanglement.concurrence import (
    effective_two_qubit,
    monogamy_residual,
    pair_concurrence,
    pairwise_concurrences,
    tangle,
    trajectory_concurrences,
    wootters_concurrence,
)
from evolution.branches import branch_run
from evolution.models import Frame, Scenario
from evolution.runner import initial_state, run_scenario
from hilbert.models import DensityMatrix, PureState, SubsystemLayout
from hilbert.operations import partial_trace, tensor_product

QUBITS = SubsystemLayout((2, 2), ("a", "b"))
BELL = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2


def _random_pure(dim, rng):
    vector = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vector / np.linalg.norm(vector)


def _scenario(**kwargs):
    defaults = {"alpha": 0.5, "beta": 0.5, "truncation_1": 12, "truncation_2": 12}
    defaults.update(kwargs)
    return Scenario(**defaults)


# Test the Bell state is maximally entangled
def test_wootters_bell_state():
    assert wootters_concurrence(BELL) == pytest.approx(1.0)
    assert wootters_concurrence(DensityMatrix(QUBITS, BELL)) == pytest.approx(1.0)


# Test Werner states follow max(0, (3p - 1)/2)
@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.6, 0.9])
def test_wootters_werner_state(p):
    werner = p * BELL + (1 - p) * np.eye(4) / 4

    assert wootters_concurrence(werner) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


# Test mixtures of product states have zero concurrence
def test_wootters_separable_mixtures():
    rng = np.random.default_rng(7)
    for _ in range(20):
        weights = rng.dirichlet(np.ones(4))
        rho = np.zeros((4, 4), dtype=complex)
        for weight in weights:
            product = np.kron(_random_pure(2, rng), _random_pure(2, rng))
            rho += weight * np.outer(product, product.conj())
        assert wootters_concurrence(rho) < 1e-8


# Test C^2 = 4 det(rho_A) for pure two-qubit states
def test_wootters_pure_state_tangle():
    rng = np.random.default_rng(11)
    for _ in range(10):
        state = PureState(QUBITS, _random_pure(4, rng)).to_density()
        concurrence = wootters_concurrence(state)
        assert concurrence**2 == pytest.approx(tangle(partial_trace(state, [0])), abs=1e-8)


# Test local unitaries do not change the concurrence
def test_wootters_local_unitary_invariance():
    werner = 0.7 * BELL + 0.3 * np.eye(4) / 4
    for seed in range(5):
        local = np.kron(
            unitary_group.rvs(2, random_state=seed), unitary_group.rvs(2, random_state=seed + 10)
        )
        rotated = local @ werner @ local.conj().T
        assert wootters_concurrence(rotated) == pytest.approx(wootters_concurrence(werner), abs=1e-8)


# Test the reduction of a qubit-like field keeps all the weight
def test_effective_two_qubit_exact_span():
    atom = SubsystemLayout.single(2, "atom")
    field = SubsystemLayout.single(6, "field")
    # (|e>|1> + |g>|4>)/sqrt(2)
    amplitudes = np.zeros(12)
    amplitudes[1] = amplitudes[6 + 4] = 1
    state = PureState.normalized(atom.concat(field), amplitudes).to_density()

    reduction = effective_two_qubit(state)

    assert reduction.discarded_weight < 1e-12
    assert not reduction.support_deficient
    assert wootters_concurrence(reduction.two_qubit_state) == pytest.approx(1.0)


# Test a product of coherent fields gives zero concurrence
def test_effective_two_qubit_product_fields():
    rho = initial_state(_scenario())

    reduction = effective_two_qubit(partial_trace(rho, [1, 2]))

    assert reduction.support_deficient
    assert pairwise_concurrences(rho).values == (0.0, 0.0, 0.0)


# Test the reduced pair must have two parties
def test_effective_two_qubit_requires_pair():
    with pytest.raises(ValueError):
        effective_two_qubit(initial_state(_scenario()))


# Test concurrences are unchanged by random local unitaries on every factor
def test_pairwise_local_unitary_invariance():
    scenario = _scenario(truncation_1=8, truncation_2=8).with_damping(0.05, 0.05)
    rho = run_scenario(scenario, [90.0]).density(0)
    local = np.kron(
        np.kron(unitary_group.rvs(2, random_state=1), unitary_group.rvs(9, random_state=2)),
        unitary_group.rvs(9, random_state=3),
    )
    rotated = DensityMatrix(rho.layout, local @ rho.entries @ local.conj().T)

    before = pairwise_concurrences(rho).values
    after = pairwise_concurrences(rotated).values

    assert after == pytest.approx(before, abs=1e-8)


# Test only the atom and field 1 are entangled after the first cavity
def test_pairwise_after_first_cavity():
    scenario = _scenario()
    rho = run_scenario(scenario, [30.0]).density(0)

    pairwise = pairwise_concurrences(rho)

    assert pairwise.atom_field1 > 0.1
    assert pairwise.atom_field2 == 0.0
    assert pairwise.field1_field2 == 0.0
    assert pairwise.flags == ()


# Test the atom is entangled with both fields in the second cavity
def test_pairwise_atom_entangled_with_both_fields_in_second_cavity():
    trajectory = run_scenario(_scenario(), np.linspace(60, 90, 7))

    maxima = trajectory_concurrences(trajectory).max(axis=0)

    assert maxima[0] > 0.1
    assert maxima[1] > 0.1


# Test the two fields stay separable: field 2 only sees atom-diagonal maps
@pytest.mark.parametrize("g, q", [(0.0, 0.0), (0.5, 1.0)])
def test_pairwise_fields_separable(g, q):
    scenario = _scenario().with_damping(g, q)
    times = np.linspace(0, 90, 10)

    dense = trajectory_concurrences(run_scenario(scenario, times))
    branch = trajectory_concurrences(branch_run(scenario, times))

    assert np.max(dense[:, 2]) < 1e-10
    assert np.max(branch[:, 2]) < 1e-10
    if g == q == 0.0:
        assert np.max(dense[:, 2]) < 1e-12
        assert np.max(branch[:, 2]) < 1e-12


# Test concurrences do not depend on the lab or rotating frame
def test_pairwise_frame_invariance():
    scenario = _scenario(truncation_1=15, truncation_2=15).with_damping(0.05, 0.05)
    times = np.linspace(0, 90, 7)

    rotating = trajectory_concurrences(run_scenario(scenario, times))
    lab = trajectory_concurrences(
        run_scenario(scenario.model_copy(update={"frame": Frame.LAB}), times)
    )

    assert np.allclose(lab, rotating, atol=1e-8)


# Test a random rotation inside the field support leaves the concurrence unchanged
def test_pair_concurrence_support_basis_invariance():
    rho = run_scenario(_scenario(alpha=1.0, truncation_1=15), [30.0]).density(0)
    pair = partial_trace(rho, [0, 1])
    reduction = effective_two_qubit(pair)
    basis = reduction.support_bases[1]
    mixing = unitary_group.rvs(2, random_state=3)
    inside = basis @ (mixing - np.eye(2)) @ basis.conj().T
    local = np.kron(np.eye(2), np.eye(basis.shape[0]) + inside)
    rotated = DensityMatrix(pair.layout, local @ pair.entries @ local.conj().T)

    before, _ = pair_concurrence(pair)
    after, rotated_reduction = pair_concurrence(rotated)

    assert np.allclose(basis.conj().T @ basis, np.eye(2), atol=1e-10)
    assert after == pytest.approx(before, abs=1e-8)
    assert rotated_reduction.discarded_weight == pytest.approx(
        reduction.discarded_weight, abs=1e-10
    )


# Test the reduced state embeds back onto the pair state
def test_effective_two_qubit_embedding():
    rho = run_scenario(_scenario(alpha=1.0, truncation_1=15), [30.0]).density(0)
    pair = partial_trace(rho, [0, 1])

    reduction = effective_two_qubit(pair)

    assert reduction.discarded_weight < 1e-10
    assert np.allclose(reduction.embedded(), pair.entries, atol=1e-8)


# Test strict reductions refuse a field with a single support vector
def test_effective_two_qubit_strict_support():
    rho = partial_trace(initial_state(_scenario()), [0, 1])

    assert effective_two_qubit(rho).support_deficient
    with pytest.raises(SupportDeficient):
        effective_two_qubit(rho, strict=True)


# Test branch snapshots give the same concurrences as dense ones
def test_pairwise_branch_snapshot():
    scenario = _scenario(truncation_1=15, truncation_2=15).with_damping(0.5, 0.5)
    times = [30.0, 60.0, 90.0]

    dense = trajectory_concurrences(run_scenario(scenario, times))
    branch = trajectory_concurrences(branch_run(scenario, times))

    assert dense.shape == (3, 3)
    assert np.allclose(branch, dense, atol=1e-8)


# Test the tangle of pure and maximally mixed qubits
def test_tangle():
    assert tangle(np.diag([1.0, 0.0])) == 0.0
    assert tangle(np.eye(2) / 2) == pytest.approx(1.0)


# Test the monogamy residual on a pure product and at the first cavity exit
def test_monogamy_residual_pure_states():
    scenario = _scenario()

    assert monogamy_residual(initial_state(scenario)) == pytest.approx(0.0, abs=1e-12)
    rho = run_scenario(scenario, [30.0]).density(0)
    assert monogamy_residual(rho) == pytest.approx(0.0, abs=1e-6)


# Test the CKW inequality along an ideal passage
def test_monogamy_residual_ideal_passage():
    trajectory = run_scenario(_scenario(), np.linspace(0, 90, 10))

    for rho in trajectory.densities():
        assert monogamy_residual(rho) >= -1e-6


# Test mixed global states have no monogamy residual
def test_monogamy_residual_mixed_state():
    scenario = _scenario().with_damping(1.0, 1.0)
    rho = run_scenario(scenario, [30.0]).density(0)

    assert monogamy_residual(rho) is None


# Test mixed atoms are accepted as product factors
def test_pairwise_mixed_product_state():
    atom = DensityMatrix(SubsystemLayout.single(2, "atom"), np.diag([0.4, 0.6]))
    fields = initial_state(_scenario())
    state = tensor_product([atom, partial_trace(fields, [1]), partial_trace(fields, [2])])

    assert pairwise_concurrences(state).values == (0.0, 0.0, 0.0)
