import pytest

from cavity_qed.errors import ConfigError
from cli.config import parse_config
from evolution.models import Backend, Frame


# Test an empty file yields the experimental defaults
def test_parse_config_defaults():
    scenario, spec = parse_config("")

    assert scenario.omega_1 == pytest.approx(6.25e-3)
    assert scenario.omega_2 == pytest.approx(6.25e-3)
    assert scenario.Delta_1 == 0.1
    assert scenario.Omega_1 == 0.025
    assert scenario.stage_durations == (30.0, 10.0, 10.0, 10.0, 30.0)
    assert scenario.alpha == scenario.beta == 0.5
    assert scenario.gammas == (0.0, 0.0)
    assert spec.g == spec.q == [0.0]
    assert spec.samples == 181
    assert spec.backend is Backend.DENSE


# Test comments, blank lines and lists are understood
def test_parse_config_full_file():
    text = """
    # sweep over the second cavity
    alpha = 1
    beta = 0.5, 1, 2   # three amplitudes
    q = 0, 0.05, 0.5, 1

    stage_durations = 20, 5, 5, 5, 20
    frame = lab
    backend = branch
    samples = 11
    truncation_1 = 20
    """

    scenario, spec = parse_config(text)

    assert scenario.alpha == 1
    assert scenario.frame is Frame.LAB
    assert scenario.truncations[0] == 20
    assert scenario.total_duration == 55.0
    assert spec.beta == [0.5, 1, 2]
    assert spec.q == [0, 0.05, 0.5, 1]
    assert spec.backend is Backend.BRANCH
    assert len(spec.points()) == 12


# Test explicit damping rates become sweep ratios
def test_parse_config_gamma():
    scenario, spec = parse_config("gamma_1 = 3.125e-3")

    assert scenario.gamma_1 == 3.125e-3
    assert spec.g == [pytest.approx(0.5)]


# Test omega alone leaves the Rabi parameters unset
def test_parse_config_omega_only():
    scenario, _ = parse_config("omega_1 = 5e-3")

    assert scenario.omega_1 == 5e-3
    assert scenario.Omega_1 is None
    assert scenario.Delta_1 is None


# Test Omega and Delta derive the dispersive frequency
def test_parse_config_rabi_and_detuning():
    scenario, _ = parse_config("Omega_2 = 0.05\nDelta_2 = 0.2")

    assert scenario.omega_2 == pytest.approx(0.0125)


# Test a complex amplitude
def test_parse_config_complex_amplitude():
    scenario, _ = parse_config("alpha = 0.5+0.5i")

    assert scenario.alpha == complex(0.5, 0.5)


# Test a negative damping rate is a config error
def test_parse_config_negative_gamma():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("\ngamma_1 = -1")

    assert excinfo.value.key == "gamma_1"
    assert excinfo.value.line == 2


# Test an inconsistent dispersive frequency is a config error
def test_parse_config_inconsistent_omega():
    text = "omega_1 = 5e-3\nOmega_1 = 0.025\nDelta_1 = 0.1"

    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)

    assert excinfo.value.key in ("omega_1", "Omega_1", "Delta_1")


# Test unknown keys are rejected with their line
def test_parse_config_unknown_key():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("alpha = 1\ncolour = blue")

    assert excinfo.value.key == "colour"
    assert excinfo.value.line == 2


# Test malformed lines, values and repeated keys
@pytest.mark.parametrize(
    "text, key",
    [
        ("alpha 1", None),
        ("samples = many", "samples"),
        ("alpha = 1\nalpha = 2", "alpha"),
        ("frame = sideways", "frame"),
        ("phi =", "phi"),
    ],
)
def test_parse_config_malformed(text, key):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)

    assert excinfo.value.key == key


# Test gamma_1 and g cannot both be given
def test_parse_config_gamma_and_ratio_conflict():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("gamma_1 = 1e-3\ng = 0.5")

    assert excinfo.value.key in ("gamma_1", "g")


# Test sweep ratios must be non-negative
def test_parse_config_negative_ratio():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("q = 0, -0.5")

    assert excinfo.value.key == "q"
    assert excinfo.value.line == 1


# Test stage durations need five values
def test_parse_config_stage_durations_length():
    with pytest.raises(ConfigError) as excinfo:
        parse_config("stage_durations = 30, 10")

    assert excinfo.value.key == "stage_durations"
