class CavityQEDError(Exception):
    """Base class for every error raised by the simulator."""


class TruncationTooSmall(CavityQEDError):
    """
    Raised when a coherent state does not fit in the requested Fock space.

    :param amplitude: Coherent amplitude that was requested.
    :param truncation: Highest Fock number kept.
    :param tail: Probability mass beyond the truncation.
    """

    def __init__(self, amplitude, truncation, tail):
        self.amplitude = amplitude
        self.truncation = truncation
        self.tail = tail
        super().__init__(
            f"Coherent state {amplitude} needs more than {truncation} photons "
            f"(tail mass {tail:.3e})"
        )


class NonPhysicalState(CavityQEDError):
    """Raised when a density matrix breaks hermiticity, trace or positivity."""


class ConfigError(CavityQEDError):
    """
    Raised for invalid configuration text or inconsistent scenarios.

    :param message: What is wrong.
    :param key: Offending configuration key, if known.
    :param line: 1-based line number in the config file, if known.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        location = ""
        if key is not None:
            location += f"key '{key}'"
        if line is not None:
            location += f"{' ' if location else ''}(line {line})"
        super().__init__(f"{location}: {message}" if location else message)


class UnsupportedInitialState(CavityQEDError):
    """Raised when a state is outside the atom x coherent x coherent family."""


class StepUnderflow(CavityQEDError):
    """Raised when the oracle integrator cannot meet its tolerance."""


class SupportDeficient(CavityQEDError):
    """Raised when a reduced field state has fewer than two support vectors."""
