import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy as np

from cavity_qed import settings
from cavity_qed.errors import NonPhysicalState

logger = logging.getLogger(__name__)

ATOM = "atom"
FIELD_1 = "field1"
FIELD_2 = "field2"


@dataclass(frozen=True)
class SubsystemLayout:
    """
    Ordered tensor structure of a composite state.

    The canonical ordering is (atom, field1, field2); the atom slot, when
    present, is always a two-level system.
    """

    dims: Tuple[int, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError(
                f"Layout has {len(self.dims)} dims but {len(self.labels)} labels"
            )
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"Duplicate subsystem labels: {self.labels}")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"Subsystem dimensions must be positive: {self.dims}")
        if ATOM in self.labels and self.dims[self.labels.index(ATOM)] != 2:
            raise ValueError("The atom subsystem must have dimension 2")

    @classmethod
    def cavity(cls, truncation_1, truncation_2):
        """Canonical (atom, field1, field2) layout for Fock truncations N1, N2."""
        return cls((2, truncation_1 + 1, truncation_2 + 1), (ATOM, FIELD_1, FIELD_2))

    @classmethod
    def single(cls, dim, label):
        return cls((dim,), (label,))

    @property
    def total_dim(self):
        return math.prod(self.dims)

    def __len__(self):
        return len(self.dims)

    def index(self, subsystem: Union[int, str]) -> int:
        """Position of a subsystem given either by index or by label."""
        if isinstance(subsystem, str):
            try:
                return self.labels.index(subsystem)
            except ValueError:
                raise KeyError(f"No subsystem labelled '{subsystem}' in {self.labels}")
        if not 0 <= subsystem < len(self.dims):
            raise IndexError(f"Subsystem index {subsystem} out of range")
        return int(subsystem)

    def indices(self, subsystems: Iterable[Union[int, str]]) -> Tuple[int, ...]:
        return tuple(sorted({self.index(s) for s in subsystems}))

    def select(self, keep: Iterable[int]):
        keep = sorted(keep)
        return SubsystemLayout(
            tuple(self.dims[i] for i in keep), tuple(self.labels[i] for i in keep)
        )

    def concat(self, other):
        return SubsystemLayout.joined([self, other])

    @classmethod
    def joined(cls, layouts):
        """
        Concatenate layouts; repeated labels are numbered in order, so
        (atom, field, field) becomes (atom, field1, field2).
        """
        layouts = list(layouts)
        dims = sum((layout.dims for layout in layouts), ())
        labels = sum((layout.labels for layout in layouts), ())
        counts = Counter(labels)
        seen = Counter()
        unique = []
        for label in labels:
            if counts[label] > 1:
                seen[label] += 1
                label = f"{label}{seen[label]}"
            unique.append(label)
        return cls(dims, tuple(unique))

    def truncation(self, subsystem):
        """Highest Fock number of a field subsystem."""
        return self.dims[self.index(subsystem)] - 1


def check_density(entries, positivity_tolerance=None):
    """
    Validate the density matrix invariants.

    :param entries: Square complex array.
    :param positivity_tolerance: Lowest eigenvalue accepted; ``None`` uses the
        global setting. Positivity is only checked up to
        ``settings.POSITIVITY_CHECK_MAX_DIM`` unless forced by
        :func:`check_positivity`.
    :raises NonPhysicalState: when an invariant is broken.
    """
    asymmetry = np.max(np.abs(entries - entries.conj().T)) if entries.size else 0.0
    if asymmetry > settings.HERMITICITY_TOLERANCE:
        logger.error(f"Density matrix is not Hermitian (deviation {asymmetry:.3e})")
        raise NonPhysicalState(f"Density matrix is not Hermitian ({asymmetry:.3e})")

    trace = np.trace(entries).real
    if abs(trace - 1) > settings.TRACE_TOLERANCE:
        logger.error(f"Density matrix trace is {trace!r}")
        raise NonPhysicalState(f"Density matrix trace {trace:.12g} differs from 1")

    if entries.shape[0] <= settings.POSITIVITY_CHECK_MAX_DIM:
        check_positivity(entries, positivity_tolerance)


def check_positivity(entries, positivity_tolerance=None):
    tolerance = (
        settings.POSITIVITY_TOLERANCE
        if positivity_tolerance is None
        else positivity_tolerance
    )
    lowest = np.linalg.eigvalsh(entries)[0]
    if lowest < tolerance:
        logger.error(f"Density matrix has eigenvalue {lowest:.3e}")
        raise NonPhysicalState(f"Density matrix has negative eigenvalue {lowest:.3e}")
    return lowest


def hermitize(entries):
    return 0.5 * (entries + entries.conj().T)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive matrix on a :class:`SubsystemLayout`."""

    layout: SubsystemLayout
    entries: np.ndarray
    positivity_tolerance: float = field(
        default=settings.POSITIVITY_TOLERANCE, repr=False, compare=False
    )

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        dim = self.layout.total_dim
        if entries.shape != (dim, dim):
            raise ValueError(
                f"Entries of shape {entries.shape} do not match layout dimension {dim}"
            )
        check_density(entries, self.positivity_tolerance)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self):
        return self.layout.total_dim

    def tensor(self):
        """View as an array with one ket axis and one bra axis per subsystem."""
        return self.entries.reshape(self.layout.dims + self.layout.dims)

    @classmethod
    def from_tensor(cls, layout, tensor, **kwargs):
        dim = layout.total_dim
        return cls(layout, hermitize(np.asarray(tensor).reshape(dim, dim)), **kwargs)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on a :class:`SubsystemLayout`."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (self.layout.total_dim,):
            raise ValueError(
                f"{amplitudes.size} amplitudes do not match layout dimension "
                f"{self.layout.total_dim}"
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1) > settings.TRACE_TOLERANCE:
            raise NonPhysicalState(f"State vector norm {norm:.12g} differs from 1")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def normalized(cls, layout, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        return cls(layout, amplitudes / np.linalg.norm(amplitudes))

    def to_density(self):
        return DensityMatrix(
            self.layout, hermitize(np.outer(self.amplitudes, self.amplitudes.conj()))
        )
