"""
Line-oriented ``key = value`` configuration.

Blank lines and ``#`` comments are ignored; every key may appear once.
List-valued keys (g, q, alpha, beta, stage_durations) take comma-separated
values. Absent keys keep the experimental defaults.
"""

import logging

from pydantic import ValidationError

from cavity_qed import settings
from cavity_qed.errors import ConfigError
from cli.models import SweepSpec
from evolution.models import Backend, Frame, Scenario, parse_complex

logger = logging.getLogger(__name__)

FLOAT_KEYS = {
    "omega_a",
    "omega_tilde_1",
    "omega_tilde_2",
    "omega_1",
    "omega_2",
    "Omega_1",
    "Omega_2",
    "Delta_1",
    "Delta_2",
    "gamma_1",
    "gamma_2",
    "ramsey_angle",
    "phi",
    "tail_tolerance",
}
INT_KEYS = {"truncation_1", "truncation_2", "samples"}
FLOAT_LIST_KEYS = {"g", "q", "stage_durations"}
COMPLEX_LIST_KEYS = {"alpha", "beta"}
CHOICE_KEYS = {"frame": Frame, "backend": Backend}
KNOWN_KEYS = FLOAT_KEYS | INT_KEYS | FLOAT_LIST_KEYS | COMPLEX_LIST_KEYS | set(CHOICE_KEYS)


def _convert(key, raw, line):
    try:
        if key in FLOAT_KEYS:
            return float(raw)
        if key in INT_KEYS:
            return int(raw)
        if key in FLOAT_LIST_KEYS:
            return [float(v) for v in raw.split(",")]
        if key in COMPLEX_LIST_KEYS:
            return [parse_complex(v.strip()) for v in raw.split(",")]
        return CHOICE_KEYS[key](raw.lower())
    except ValueError as e:
        raise ConfigError(f"Cannot parse '{raw}': {e}", key=key, line=line)


def read_entries(text):
    """
    Parse ``key = value`` lines into {key: (value, line)}.

    :raises ConfigError: on syntax errors, unknown or repeated keys.
    """
    entries = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"Expected 'key = value', got '{content}'", line=number)
        key, raw = (part.strip() for part in content.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError("Unknown key", key=key, line=number)
        if key in entries:
            raise ConfigError(
                f"Repeated key (first set on line {entries[key][1]})", key=key, line=number
            )
        if not raw:
            raise ConfigError("Missing value", key=key, line=number)
        entries[key] = (_convert(key, raw, number), number)
    return entries


def _coupling_fields(values, index):
    """
    Resolve omega_i, Omega_i and Delta_i.

    omega_i alone leaves the Rabi parameters unset; Omega_i/Delta_i alone
    derive omega_i; one of them next to omega_i derives the other.
    """
    omega_key, rabi_key, detuning_key = f"omega_{index}", f"Omega_{index}", f"Delta_{index}"
    omega = values.get(omega_key)
    rabi = values.get(rabi_key)
    detuning = values.get(detuning_key)
    if omega is None:
        rabi = settings.DEFAULT_RABI if rabi is None else rabi
        detuning = settings.DEFAULT_DELTA if detuning is None else detuning
        if detuning == 0:
            raise ValueError(f"{detuning_key} must be non-zero")
        return {omega_key: rabi**2 / detuning, rabi_key: rabi, detuning_key: detuning}
    if rabi is None and detuning is None:
        return {omega_key: omega, rabi_key: None, detuning_key: None}
    if rabi is None:
        if omega * detuning < 0:
            raise ValueError(f"{omega_key} and {detuning_key} must share a sign")
        rabi = (omega * detuning) ** 0.5
    elif detuning is None:
        if omega == 0:
            raise ValueError(f"{omega_key} = 0 leaves {detuning_key} undefined")
        detuning = rabi**2 / omega
    return {omega_key: omega, rabi_key: rabi, detuning_key: detuning}


def _damping_ratios(values, index, ratio_key):
    """Sweep ratios for field ``index``: the explicit list or gamma_i / omega_i."""
    gamma_key, omega = f"gamma_{index}", values[f"omega_{index}"]
    if ratio_key in values and gamma_key in values:
        raise ValueError(f"Set either {gamma_key} or {ratio_key}, not both")
    if gamma_key not in values:
        return values.get(ratio_key, [0.0])
    gamma = values[gamma_key]
    if gamma < 0:
        raise ValueError(f"{gamma_key} must be >= 0, got {gamma}")
    if omega == 0:
        if gamma == 0:
            return [0.0]
        raise ValueError(f"{gamma_key} needs a non-zero omega_{index}")
    return [gamma / omega]


def _offending_key(message, entries):
    for key in sorted(entries, key=len, reverse=True):
        if key in message:
            return key
    return None


def parse_config(text):
    """
    Build the scenario and sweep grid described by ``text``.

    :return: (Scenario, SweepSpec); the scenario carries the first alpha and
        beta and the first g, q as damping rates.
    :raises ConfigError: with the offending key and line when known.
    """
    entries = read_entries(text)
    values = {key: value for key, (value, _) in entries.items()}

    try:
        scenario_fields = {
            key: values[key]
            for key in FLOAT_KEYS | {"truncation_1", "truncation_2", "frame"}
            if key in values and not key.startswith(("omega_1", "omega_2", "Omega", "Delta", "gamma"))
        }
        for index in (1, 2):
            scenario_fields.update(_coupling_fields(values, index))
        if "stage_durations" in values:
            scenario_fields["stage_durations"] = tuple(values["stage_durations"])
        alphas = values.get("alpha", [complex(settings.DEFAULT_AMPLITUDE)])
        betas = values.get("beta", [complex(settings.DEFAULT_AMPLITUDE)])
        resolved = {**values, **scenario_fields}
        g = _damping_ratios(resolved, 1, "g")
        q = _damping_ratios(resolved, 2, "q")

        spec = SweepSpec(
            g=g,
            q=q,
            alpha=alphas,
            beta=betas,
            samples=values.get("samples", settings.DEFAULT_SAMPLES),
            backend=values.get("backend", Backend.DENSE),
        )
        scenario = Scenario(alpha=alphas[0], beta=betas[0], **scenario_fields)
        scenario = scenario.with_damping(g[0], q[0])
        if "gamma_1" in values:
            scenario = scenario.model_copy(update={"gamma_1": values["gamma_1"]})
        if "gamma_2" in values:
            scenario = scenario.model_copy(update={"gamma_2": values["gamma_2"]})
    except ValidationError as e:
        error = e.errors()[0]
        location = [str(part) for part in error["loc"]]
        key = next((part for part in location if part in entries), None)
        key = key or _offending_key(error["msg"], entries)
        line = entries[key][1] if key else None
        raise ConfigError(error["msg"], key=key, line=line)
    except ValueError as e:
        key = _offending_key(str(e), entries)
        raise ConfigError(str(e), key=key, line=entries[key][1] if key else None)

    logger.info(f"Parsed config: {len(spec.points())} sweep points, backend {spec.backend.value}")
    return scenario, spec
