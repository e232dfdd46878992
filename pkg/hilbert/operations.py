import logging
import math
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from cavity_qed import settings
from cavity_qed.errors import TruncationTooSmall
from hilbert.models import ATOM, DensityMatrix, PureState, SubsystemLayout, hermitize

logger = logging.getLogger(__name__)


def default_truncation(amplitude):
    """
    Fock truncation covering the Poisson tail of a coherent amplitude.

    N = ceil(|a|^2 + 8|a| + 6); the rule keeps the tail mass far below the
    default tolerance for |a| <= 2.
    """
    modulus = abs(amplitude)
    return int(math.ceil(modulus**2 + 8 * modulus + 6))


def tail_mass(amplitude, truncation):
    """Probability of more than ``truncation`` photons in the coherent state."""
    return float(poisson.sf(truncation, abs(amplitude) ** 2))


def coherent_amplitudes(amplitude, truncation):
    """Untruncated-normalization Fock coefficients <n|a> for n = 0..N."""
    n = np.arange(truncation + 1)
    amplitude = complex(amplitude)
    if amplitude == 0:
        coefficients = np.zeros(truncation + 1, dtype=complex)
        coefficients[0] = 1.0
        return coefficients
    log_modulus = (
        -0.5 * abs(amplitude) ** 2 + n * math.log(abs(amplitude)) - 0.5 * gammaln(n + 1)
    )
    return np.exp(log_modulus) * np.exp(1j * n * np.angle(amplitude))


def coherent_state(amplitude, truncation, tolerance=None) -> PureState:
    """
    Coherent state |a> in the Fock basis {0..N}, renormalized after truncation.

    :param amplitude: Complex coherent amplitude.
    :param truncation: Highest photon number kept (N >= 1).
    :param tolerance: Largest acceptable tail mass; defaults to
        ``settings.TAIL_TOLERANCE``.
    :raises TruncationTooSmall: when the discarded tail exceeds the tolerance.
    """
    if truncation < 1:
        raise ValueError(f"Truncation must be at least 1, got {truncation}")
    tolerance = settings.TAIL_TOLERANCE if tolerance is None else tolerance
    tail = tail_mass(amplitude, truncation)
    if tail > tolerance:
        raise TruncationTooSmall(amplitude, truncation, tail)
    return PureState.normalized(
        SubsystemLayout.single(truncation + 1, "field"),
        coherent_amplitudes(amplitude, truncation),
    )


def coherent_overlap(a, b):
    """Exact overlap <a|b> of two (untruncated) coherent states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    result = np.exp(-0.5 * np.abs(a) ** 2 - 0.5 * np.abs(b) ** 2 + np.conj(a) * b)
    return complex(result) if result.ndim == 0 else result


def annihilation(truncation):
    return np.diag(np.sqrt(np.arange(1, truncation + 1)), k=1).astype(complex)


def number_operator(truncation):
    return np.diag(np.arange(truncation + 1)).astype(complex)


Factor = Union[PureState, DensityMatrix, np.ndarray]


def tensor_product(factors: Sequence[Factor]):
    """
    Kronecker composite of states or operators, first factor outermost.

    Pure states compose to a pure state, any density matrix promotes the
    result to a density matrix, and bare arrays compose to an array.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    if all(isinstance(f, np.ndarray) for f in factors):
        return reduce(np.kron, factors)
    if not all(isinstance(f, (PureState, DensityMatrix)) for f in factors):
        raise TypeError("Cannot mix states and bare operators in a tensor product")

    layout = SubsystemLayout.joined(f.layout for f in factors)
    if all(isinstance(f, PureState) for f in factors):
        return PureState(layout, reduce(np.kron, (f.amplitudes for f in factors)))
    matrices = [f.to_density() if isinstance(f, PureState) else f for f in factors]
    return DensityMatrix(layout, hermitize(reduce(np.kron, (m.entries for m in matrices))))


def partial_trace(rho: DensityMatrix, keep: Iterable[Union[int, str]]) -> DensityMatrix:
    """
    Reduced state over the subsystems in ``keep`` (indices or labels).

    The kept subsystems stay in layout order.
    """
    layout = rho.layout
    kept = layout.indices(keep)
    if not kept:
        raise ValueError("partial_trace needs at least one subsystem to keep")
    if len(kept) == len(layout):
        return rho

    tensor = rho.tensor()
    # descending, so the axes still to be traced keep their positions
    for axis in sorted(set(range(len(layout))) - set(kept), reverse=True):
        remaining = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + remaining)

    reduced = layout.select(kept)
    dim = reduced.total_dim
    return DensityMatrix(
        reduced,
        hermitize(tensor.reshape(dim, dim)),
        positivity_tolerance=rho.positivity_tolerance,
    )


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma."""
    if rho.layout.dims != sigma.layout.dims:
        raise ValueError(
            f"Cannot compare layouts {rho.layout.dims} and {sigma.layout.dims}"
        )
    eigenvalues = np.linalg.eigvalsh(hermitize(rho.entries - sigma.entries))
    return float(min(1.0, 0.5 * np.sum(np.abs(eigenvalues))))


def _field_reduction(rho: DensityMatrix, field: Union[int, str]) -> DensityMatrix:
    index = rho.layout.index(field)
    if rho.layout.labels[index] == ATOM:
        raise ValueError(f"Subsystem {field!r} is the atom, not a Fock field")
    return partial_trace(rho, [index])


def photon_number_distribution(rho: DensityMatrix, field: Union[int, str]) -> np.ndarray:
    """
    Photon-number probabilities P_n of one field subsystem.

    :raises ValueError: if ``field`` names the atom.
    """
    reduced = _field_reduction(rho, field)
    return np.clip(np.diag(reduced.entries).real, 0.0, None)


def mean_photon_number(rho: DensityMatrix, field: Union[int, str]) -> float:
    reduced = _field_reduction(rho, field)
    number = number_operator(reduced.dim - 1)
    return float(np.trace(number @ reduced.entries).real)


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2."""
    return float(np.vdot(rho.entries, rho.entries).real)
