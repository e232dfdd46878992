import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from cavity_qed import settings
from evolution.models import Scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DispersiveValidityReport:
    ratios: Tuple[Optional[float], Optional[float]]
    threshold: float
    warnings: List[str] = field(default_factory=list)

    @property
    def valid(self):
        return not self.warnings


def dispersive_validity(scenario: Scenario, threshold=None) -> DispersiveValidityReport:
    """
    Check |Delta_i| >> Omega_i sqrt(n_i + 1) with n_i the mean photon number.

    The ratio r_i = |Delta_i| / (Omega_i sqrt(n_i + 1)) is reported per field;
    a ratio below ``threshold`` produces a warning, never an error. Fields
    without Omega_i/Delta_i get ``None``.
    """
    threshold = settings.DISPERSIVE_RATIO_THRESHOLD if threshold is None else threshold
    ratios = []
    warnings = []
    for i, amplitude in zip((1, 2), scenario.amplitudes):
        rabi = getattr(scenario, f"Omega_{i}")
        detuning = getattr(scenario, f"Delta_{i}")
        if rabi is None or detuning is None:
            ratios.append(None)
            continue
        if rabi == 0:
            ratios.append(math.inf)
            continue
        ratio = abs(detuning) / (rabi * math.sqrt(abs(amplitude) ** 2 + 1))
        ratios.append(ratio)
        if ratio < threshold:
            message = (
                f"Cavity {i}: |Delta|/(Omega sqrt(n+1)) = {ratio:.3g} < {threshold}; "
                f"the dispersive approximation is doubtful"
            )
            logger.warning(message)
            warnings.append(message)
    return DispersiveValidityReport(tuple(ratios), threshold, warnings)
