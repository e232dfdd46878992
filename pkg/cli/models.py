import itertools
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

from cavity_qed import settings
from evolution.models import Backend, Scenario, parse_complex


class SweepSpec(BaseModel):
    """
    Parameter grid of a sweep. Damping is given relative to the dispersive
    frequencies: gamma_1 = g omega_1, gamma_2 = q omega_2.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    g: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    q: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    alpha: List[complex] = Field(
        default_factory=lambda: [complex(settings.DEFAULT_AMPLITUDE)], min_length=1
    )
    beta: List[complex] = Field(
        default_factory=lambda: [complex(settings.DEFAULT_AMPLITUDE)], min_length=1
    )
    samples: int = Field(default=settings.DEFAULT_SAMPLES, ge=2)
    backend: Backend = Backend.DENSE

    @field_validator("g", "q")
    @classmethod
    def _non_negative(cls, values):
        if any(v < 0 for v in values):
            raise ValueError(f"Damping ratios must be >= 0, got {values}")
        return values

    @field_validator("alpha", "beta", mode="before")
    @classmethod
    def _complex_amplitudes(cls, values):
        return [parse_complex(v) for v in values]

    @field_serializer("alpha", "beta", when_used="json")
    def _serialize_amplitudes(self, values):
        return [[v.real, v.imag] for v in values]

    def points(self):
        """Every (alpha, beta, g, q) combination, alpha varying slowest."""
        return list(itertools.product(self.alpha, self.beta, self.g, self.q))

    def sample_times(self, scenario: Scenario):
        return np.linspace(0.0, scenario.total_duration, self.samples)

    def scenario_for(self, base: Scenario, alpha, beta, g, q) -> Scenario:
        return base.model_copy(update={"alpha": alpha, "beta": beta}).with_damping(g, q)


class ConcurrenceRecord(BaseModel):
    """One CSV row: pairwise concurrences at time t (us)."""

    model_config = ConfigDict(frozen=True)

    t: float
    C_AF1: float = Field(ge=0, le=1)
    C_AF2: float = Field(ge=0, le=1)
    C_F1F2: float = Field(ge=0, le=1)
    discarded_weight: float = Field(default=0.0, ge=0)
    purity: float = Field(default=1.0, ge=0)
    flags: Tuple[str, ...] = ()

    def value(self, column: str) -> float:
        if column not in ("C_AF1", "C_AF2", "C_F1F2"):
            raise KeyError(f"Unknown concurrence column '{column}'")
        return getattr(self, column)


class SweepPointResult(BaseModel):
    """Summary of one written sweep file, as returned by workers."""

    model_config = ConfigDict(frozen=True)

    path: str
    samples: int
    flagged: int
    max_concurrences: Tuple[float, float, float]
    truncations: Tuple[int, int]
    error: Optional[str] = None
