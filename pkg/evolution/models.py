import enum
import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Tuple, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from cavity_qed import settings
from hilbert.models import DensityMatrix, SubsystemLayout, hermitize
from hilbert.operations import coherent_overlap, coherent_state, default_truncation

# atomic basis: index 0 is |e>, index 1 is |g>; sigma_z eigenvalues
EXCITED, GROUND = 0, 1
SIGMA_Z = np.array([1.0, -1.0])


class Frame(str, enum.Enum):
    LAB = "lab"
    ROTATING = "rotating"


class Backend(str, enum.Enum):
    DENSE = "dense"
    BRANCH = "branch"
    ORACLE = "oracle"


def parse_complex(value):
    """Accept numbers, strings such as '0.5+0.1j', or [re, im] pairs."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"Expected [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    return complex(value)


class Scenario(BaseModel):
    """
    Full physical parameter set of one atom crossing cavity, Ramsey zone and
    cavity. Frequencies in rad/us, rates in 1/us, durations in us.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega_a: float = settings.DEFAULT_OMEGA_A
    omega_tilde_1: float = settings.DEFAULT_OMEGA_A - settings.DEFAULT_DELTA
    omega_tilde_2: float = settings.DEFAULT_OMEGA_A - settings.DEFAULT_DELTA
    omega_1: float = settings.DEFAULT_DISPERSIVE
    omega_2: float = settings.DEFAULT_DISPERSIVE
    Omega_1: Optional[float] = Field(default=settings.DEFAULT_RABI, ge=0)
    Omega_2: Optional[float] = Field(default=settings.DEFAULT_RABI, ge=0)
    Delta_1: Optional[float] = settings.DEFAULT_DELTA
    Delta_2: Optional[float] = settings.DEFAULT_DELTA
    gamma_1: float = Field(default=0.0, ge=0)
    gamma_2: float = Field(default=0.0, ge=0)
    ramsey_angle: float = settings.DEFAULT_RAMSEY_ANGLE
    phi: float = 0.0
    alpha: complex = settings.DEFAULT_AMPLITUDE
    beta: complex = settings.DEFAULT_AMPLITUDE
    stage_durations: Tuple[float, float, float, float, float] = (
        settings.DEFAULT_STAGE_DURATIONS
    )
    truncation_1: Optional[int] = Field(default=None, ge=1)
    truncation_2: Optional[int] = Field(default=None, ge=1)
    frame: Frame = Frame.ROTATING
    tail_tolerance: float = Field(default=settings.TAIL_TOLERANCE, gt=0)

    @field_validator("alpha", "beta", mode="before")
    @classmethod
    def _complex_amplitude(cls, value):
        return parse_complex(value)

    @field_validator("stage_durations")
    @classmethod
    def _non_negative_durations(cls, value):
        if any(d < 0 or not math.isfinite(d) for d in value):
            raise ValueError(f"Stage durations must be finite and >= 0, got {value}")
        return value

    @field_serializer("alpha", "beta", when_used="json")
    def _serialize_amplitude(self, value):
        return [value.real, value.imag]

    @model_validator(mode="after")
    def _dispersive_consistency(self):
        for i in (1, 2):
            omega = getattr(self, f"omega_{i}")
            rabi = getattr(self, f"Omega_{i}")
            detuning = getattr(self, f"Delta_{i}")
            if rabi is None or detuning is None:
                continue
            if detuning == 0:
                raise ValueError(f"Delta_{i} must be non-zero")
            expected = rabi**2 / detuning
            if not math.isclose(omega, expected, rel_tol=1e-9, abs_tol=1e-15):
                raise ValueError(
                    f"omega_{i}={omega} is inconsistent with "
                    f"Omega_{i}^2/Delta_{i}={expected}"
                )
        return self

    @property
    def gammas(self):
        return (self.gamma_1, self.gamma_2)

    @property
    def dispersive(self):
        return (self.omega_1, self.omega_2)

    @property
    def cavity_frequencies(self):
        return (self.omega_tilde_1, self.omega_tilde_2)

    @property
    def amplitudes(self):
        return (self.alpha, self.beta)

    @property
    def truncations(self):
        """(N1, N2), explicit values or the default rule."""
        return (
            self.truncation_1 or default_truncation(self.alpha),
            self.truncation_2 or default_truncation(self.beta),
        )

    @property
    def layout(self):
        return SubsystemLayout.cavity(*self.truncations)

    @property
    def stage_times(self):
        """Stage boundaries t0..t5 with t0 = 0."""
        return tuple(float(t) for t in np.concatenate([[0.0], np.cumsum(self.stage_durations)]))

    @property
    def total_duration(self):
        return self.stage_times[-1]

    def with_damping(self, g, q):
        """Scenario with gamma_1 = g * omega_1 and gamma_2 = q * omega_2."""
        return self.model_copy(
            update={"gamma_1": g * self.omega_1, "gamma_2": q * self.omega_2}
        )

    def with_truncations(self, truncation_1, truncation_2):
        return self.model_copy(
            update={"truncation_1": truncation_1, "truncation_2": truncation_2}
        )


class StageKind(enum.Enum):
    """The five consecutive stages; value is the stage index k."""

    CAVITY1 = 0
    FREE1 = 1
    RAMSEY = 2
    FREE2 = 3
    CAVITY2 = 4

    def coupling(self, scenario: Scenario, field: int) -> float:
        """Dispersive frequency omega_ik active on field i (1 or 2) in this stage."""
        if field == 1:
            return scenario.omega_1 if self is StageKind.CAVITY1 else 0.0
        if field == 2:
            return scenario.omega_2 if self is StageKind.CAVITY2 else 0.0
        raise ValueError(f"Field must be 1 or 2, got {field}")

    def duration(self, scenario: Scenario) -> float:
        return scenario.stage_durations[self.value]


@dataclass(frozen=True)
class StageSegment:
    stage: StageKind
    start: float
    end: float

    @property
    def duration(self):
        return self.end - self.start

    def contains(self, t):
        return self.start <= t <= self.end


@dataclass(frozen=True)
class StagePlan:
    """Ordered stages of a scenario; exactly one stage is active at a time."""

    scenario: Scenario
    segments: Tuple[StageSegment, ...]

    @classmethod
    def from_scenario(cls, scenario: Scenario):
        times = scenario.stage_times
        return cls(
            scenario,
            tuple(StageSegment(stage, times[stage.value], times[stage.value + 1]) for stage in StageKind),
        )

    @property
    def end(self):
        return self.segments[-1].end

    def stage_at(self, t):
        """Stage active at time t; a boundary belongs to the earlier stage."""
        for segment in self.segments:
            if segment.duration > 0 and segment.contains(t):
                return segment.stage
        for segment in self.segments:
            if segment.contains(t):
                return segment.stage
        return self.segments[-1].stage


@dataclass(frozen=True)
class BranchState:
    """
    Exact sparse state: a sum of weighted dyads

        w |s><s'| (x) |z1><w1| (x) |z2><w2|

    with atomic levels s, s' and coherent labels per field. ``ket_labels`` and
    ``bra_labels`` have one column per field.
    """

    atom_ket: np.ndarray
    atom_bra: np.ndarray
    weights: np.ndarray
    ket_labels: np.ndarray
    bra_labels: np.ndarray

    def __post_init__(self):
        for name, dtype in (
            ("atom_ket", int),
            ("atom_bra", int),
            ("weights", complex),
            ("ket_labels", complex),
            ("bra_labels", complex),
        ):
            array = np.array(getattr(self, name), dtype=dtype)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        shape = (len(self.weights), 2)
        if self.ket_labels.shape != shape or self.bra_labels.shape != shape:
            raise ValueError("Branch labels must have shape (branches, 2)")

    @classmethod
    def product(cls, atom, alpha, beta):
        """rho_atom (x) |alpha><alpha| (x) |beta><beta| for a 2x2 atomic matrix."""
        atom = np.asarray(atom, dtype=complex)
        ket, bra = np.nonzero(np.ones((2, 2)))
        labels = np.tile([complex(alpha), complex(beta)], (4, 1))
        keep = atom[ket, bra] != 0
        return cls(ket[keep], bra[keep], atom[ket, bra][keep], labels[keep], labels[keep])

    def __len__(self):
        return len(self.weights)

    def blocks(self):
        """Branches grouped by atomic dyad, keyed by ('e'|'g', 'e'|'g')."""
        names = "eg"
        grouped = {(a, b): [] for a in names for b in names}
        for i in range(len(self)):
            grouped[(names[self.atom_ket[i]], names[self.atom_bra[i]])].append(
                (
                    complex(self.weights[i]),
                    complex(self.ket_labels[i, 0]),
                    complex(self.bra_labels[i, 0]),
                    complex(self.ket_labels[i, 1]),
                    complex(self.bra_labels[i, 1]),
                )
            )
        return grouped

    def _field_overlaps(self, field):
        """<w_i|z_i> for every branch on field 0 or 1."""
        return coherent_overlap(self.bra_labels[:, field], self.ket_labels[:, field])

    def trace(self):
        diagonal = self.atom_ket == self.atom_bra
        terms = self.weights * self._field_overlaps(0) * self._field_overlaps(1)
        return complex(np.sum(terms[diagonal]))

    def purity(self):
        """Exact Tr rho^2 from the coherent overlaps."""
        atom = (self.atom_bra[:, None] == self.atom_ket[None, :]) & (
            self.atom_bra[None, :] == self.atom_ket[:, None]
        )
        value = np.outer(self.weights, self.weights) * atom
        for field in (0, 1):
            cross = coherent_overlap(
                self.bra_labels[:, field][:, None], self.ket_labels[:, field][None, :]
            )
            value = value * cross * cross.T
        return float(np.sum(value).real)

    def reduced(self, keep, truncations, tolerance=None) -> DensityMatrix:
        """
        Dense state of the kept subsystems (0 atom, 1 field1, 2 field2).

        Traced fields enter through exact coherent overlaps; kept fields are
        densified with truncated, renormalized coherent vectors and the result
        is renormalized to unit trace.
        """
        keep = sorted(set(keep))
        layout = SubsystemLayout.cavity(*truncations).select(keep)
        dim = layout.total_dim
        entries = np.zeros((dim, dim), dtype=complex)
        atomic_basis = np.eye(2, dtype=complex)
        vectors = {}

        def vector(field, label):
            key = (field, label)
            if key not in vectors:
                vectors[key] = coherent_state(
                    label, truncations[field - 1], tolerance
                ).amplitudes
            return vectors[key]

        for i in range(len(self)):
            s, s_bra = self.atom_ket[i], self.atom_bra[i]
            weight = self.weights[i]
            kets, bras = [], []
            if 0 in keep:
                kets.append(atomic_basis[s])
                bras.append(atomic_basis[s_bra])
            elif s != s_bra:
                continue
            for field in (1, 2):
                z = complex(self.ket_labels[i, field - 1])
                w = complex(self.bra_labels[i, field - 1])
                if field in keep:
                    kets.append(vector(field, z))
                    bras.append(vector(field, w))
                else:
                    weight = weight * coherent_overlap(w, z)
            ket = reduce(np.kron, kets)
            bra = reduce(np.kron, bras)
            entries += weight * np.outer(ket, bra.conj())

        entries = hermitize(entries)
        entries /= np.trace(entries).real
        return DensityMatrix(layout, entries)

    def densify(self, truncations, tolerance=None) -> DensityMatrix:
        return self.reduced((0, 1, 2), truncations, tolerance)


@dataclass(frozen=True)
class Trajectory:
    """
    Time grid with the state at every sample. Snapshots are dense
    :class:`DensityMatrix` values, or :class:`BranchState` values densified on
    demand at the scenario truncations.
    """

    times: np.ndarray
    stages: Tuple[StageKind, ...]
    snapshots: Tuple[Union[DensityMatrix, BranchState], ...]
    backend: Backend
    scenario: Scenario

    def __len__(self):
        return len(self.snapshots)

    @property
    def truncations(self):
        return self.scenario.truncations

    def density(self, index) -> DensityMatrix:
        snapshot = self.snapshots[index]
        if isinstance(snapshot, BranchState):
            return snapshot.densify(self.truncations, self.scenario.tail_tolerance)
        return snapshot

    def densities(self):
        return [self.density(i) for i in range(len(self))]
