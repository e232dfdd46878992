import os
from unittest.mock import MagicMock, patch

import pytest
from click.testing import CliRunner

from cli.commands import cli
from cli.export import (
    HEADER,
    canonical_name,
    format_number,
    format_record,
    write_records,
)
from cli.models import ConcurrenceRecord, SweepPointResult, SweepSpec
from cli.presets import PRESETS, _grid, run_preset
from cli.records import detect_sudden_death
from cli.simulation import sweep_jobs
from evolution import superoperator
from evolution.models import Scenario

SMALL_CONFIG = """
alpha = 0.5
beta = 0.5
g = 0.05
stage_durations = 6, 2, 2, 2, 6
samples = 5
"""


def _write_config(tmp_path, text=SMALL_CONFIG, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _records(values):
    return [
        ConcurrenceRecord(t=float(t), C_AF1=v, C_AF2=0.0, C_F1F2=0.0)
        for t, v in enumerate(values)
    ]


# Test number formatting is fixed and signless at zero
def test_format_number():
    assert format_number(-0.0) == "0"
    assert format_number(1.0) == "1"
    assert format_number(1 / 3) == "0.333333333333"
    assert format_number(2.5e-12) == "2.5e-12"


# Test canonical file names
def test_canonical_name():
    assert canonical_name(0.5, 1, 0.05, 0) == "a0.5_b1_g0.05_q0.csv"
    assert canonical_name(complex(0.5, 0.1), 2.0, 1.0, 0.5) == "a0.5+0.1j_b2_g1_q0.5.csv"


# Test a record row carries its flags joined by semicolons
def test_format_record():
    record = ConcurrenceRecord(
        t=10.0,
        C_AF1=0.25,
        C_AF2=0.0,
        C_F1F2=0.0,
        discarded_weight=2e-3,
        purity=0.9,
        flags=("discarded_AF1", "discarded_AF2"),
    )

    assert format_record(record) == "10,0.25,0,0,0.002,0.9,discarded_AF1;discarded_AF2"


# Test written files are byte-identical across runs
def test_write_records_deterministic(tmp_path):
    records = _records([0.0, 0.1, 1 / 7])

    first = write_records(str(tmp_path / "one.csv"), records)
    second = write_records(str(tmp_path / "two.csv"), records)

    with open(first, "rb") as f:
        content = f.read()
    with open(second, "rb") as f:
        assert f.read() == content
    assert content.startswith((HEADER + "\n").encode())
    assert b"\r" not in content
    assert content.count(b"\n") == 4


# Test concurrence records stay within [0, 1]
def test_concurrence_record_bounds():
    with pytest.raises(ValueError):
        ConcurrenceRecord(t=0.0, C_AF1=1.5, C_AF2=0.0, C_F1F2=0.0)


# Test sudden death intervals only count zeros after positive values
def test_detect_sudden_death():
    records = _records([0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0])

    assert detect_sudden_death(records) == [(3.0, 5.0)]
    assert detect_sudden_death(records, run_length=2) == [(3.0, 5.0), (7.0, 8.0)]
    assert detect_sudden_death(records, column="C_AF2") == []


# Test sweep jobs cover the grid with canonical names
def test_sweep_jobs():
    spec = SweepSpec(g=[0.0, 0.5], q=[1.0], alpha=[0.5], beta=[1.0, 2.0])

    jobs = sweep_jobs(Scenario(), spec)

    assert len(jobs) == 4
    assert jobs[0][1] == "a0.5_b1_g0_q1.csv"
    scenario, name = jobs[-1]
    assert name == "a0.5_b2_g0.5_q1.csv"
    assert scenario.beta == 2.0
    assert scenario.gamma_1 == pytest.approx(0.5 * scenario.omega_1)
    assert scenario.gamma_2 == pytest.approx(scenario.omega_2)


# Test preset grids
def test_preset_grids():
    assert len(_grid("fig4")) == 4
    assert all(g == 0.0 for _, _, g, _ in _grid("fig4"))
    assert len(_grid("fig6")) == 12
    assert len(_grid("full")) == 144
    assert "fig2" in PRESETS
    with pytest.raises(KeyError):
        run_preset("fig3")


# Test the single-cavity preset writes closed-form and phase-space files
def test_fig2_preset(tmp_path, mocker):
    mocker.patch("cli.presets.SINGLE_CAVITY_SAMPLES", 11)

    results = run_preset("fig2", str(tmp_path))

    assert len(results) == 12
    files = os.listdir(tmp_path / "fig2")
    assert "a1_b0.5_g0_q0.csv" in files
    assert "phase_space_a1_gamma0.csv" in files
    assert "phase_space_a1_gamma0.00125.csv" in files
    with open(tmp_path / "fig2" / "a1_b0.5_g0_q0.csv") as f:
        lines = f.read().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 12
    assert all(0.0 <= r.max_concurrences[0] <= 1.0 for r in results)


# Test simulate writes one CSV for the first grid point
def test_simulate_command(tmp_path):
    config = _write_config(tmp_path)
    out_dir = tmp_path / "out"

    result = CliRunner().invoke(cli, ["simulate", config, "--out", str(out_dir)])

    assert result.exit_code == 0, result.output
    path = out_dir / "a0.5_b0.5_g0.05_q0.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 6
    assert lines[1].startswith("0,")


# Test the backend option selects the branch backend
def test_simulate_command_branch_backend(tmp_path):
    config = _write_config(tmp_path)
    dense_dir, branch_dir = tmp_path / "dense", tmp_path / "branch"

    args = ["simulate", config, "--truncation", "15,15"]
    runner = CliRunner()
    dense = runner.invoke(cli, args + ["--out", str(dense_dir)])
    branch = runner.invoke(cli, args + ["--out", str(branch_dir), "--backend", "branch"])

    assert dense.exit_code == 0, dense.output
    assert branch.exit_code == 0, branch.output
    name = "a0.5_b0.5_g0.05_q0.csv"
    dense_rows = (dense_dir / name).read_text().splitlines()[1:]
    branch_rows = (branch_dir / name).read_text().splitlines()[1:]
    for dense_row, branch_row in zip(dense_rows, branch_rows):
        dense_values = [float(v) for v in dense_row.split(",")[1:4]]
        branch_values = [float(v) for v in branch_row.split(",")[1:4]]
        assert branch_values == pytest.approx(dense_values, abs=1e-6)


# Test configuration errors exit with status 2
def test_simulate_config_error(tmp_path):
    config = _write_config(tmp_path, "colour = blue\n")

    result = CliRunner().invoke(cli, ["simulate", config, "--out", str(tmp_path)])

    assert result.exit_code == 2
    assert "colour" in result.output


# Test a malformed truncation option is a usage error
def test_simulate_bad_truncation(tmp_path):
    config = _write_config(tmp_path)

    result = CliRunner().invoke(cli, ["simulate", config, "--truncation", "12"])

    assert result.exit_code == 2


# Test sweeps dispatched to Celery collect the worker results
@patch("cli.sweeps.run_sweep_point")
def test_sweep_command_celery(mock_task, tmp_path):
    config = _write_config(tmp_path, "q = 0, 0.5\nsamples = 3\n")
    out_dir = str(tmp_path / "out")

    async_result = MagicMock()
    async_result.get.side_effect = [
        SweepPointResult(
            path=os.path.join(out_dir, name),
            samples=3,
            flagged=0,
            max_concurrences=(0.5, 0.1, 0.0),
            truncations=(10, 10),
        ).model_dump(mode="json")
        for name in ("a0.5_b0.5_g0_q0.csv", "a0.5_b0.5_g0_q0.5.csv")
    ]
    mock_task.delay.return_value = async_result

    result = CliRunner().invoke(cli, ["sweep", config, "--out", out_dir, "--celery"])

    assert result.exit_code == 0, result.output
    assert mock_task.delay.call_count == 2
    scenario, spec, directory, name, converge = mock_task.delay.call_args_list[1].args
    assert name == "a0.5_b0.5_g0_q0.5.csv"
    assert directory == out_dir
    assert converge is False
    assert Scenario.model_validate(scenario).gamma_2 == pytest.approx(
        0.5 * Scenario().omega_2
    )
    assert SweepSpec.model_validate(spec).q == [0.0, 0.5]
    assert "a0.5_b0.5_g0_q0.5.csv" in result.output


# Test a failed Celery point makes the sweep exit with status 1
@patch("cli.sweeps.run_sweep_point")
def test_sweep_command_celery_failure(mock_task, tmp_path):
    config = _write_config(tmp_path, "samples = 3\n")

    async_result = MagicMock()
    async_result.get.return_value = {
        "path": "a0.5_b0.5_g0_q0.csv",
        "samples": 0,
        "flagged": 0,
        "max_concurrences": [0.0, 0.0, 0.0],
        "truncations": [0, 0],
        "error": "Truncation too small",
    }
    mock_task.delay.return_value = async_result

    result = CliRunner().invoke(
        cli, ["sweep", config, "--out", str(tmp_path), "--celery"]
    )

    assert result.exit_code == 1


# Test the phase-space command writes the branch labels
def test_phase_space_command(tmp_path):
    config = _write_config(tmp_path, "alpha = 1\nsamples = 5\n")

    result = CliRunner().invoke(cli, ["phase-space", config, "--out", str(tmp_path)])

    assert result.exit_code == 0, result.output
    lines = (tmp_path / "phase_space_a1_gamma0.csv").read_text().splitlines()
    assert len(lines) == 6
    assert lines[1].split(",")[0] == "0"


# Test the quick validation suite passes
def test_validate_command():
    result = CliRunner().invoke(cli, ["validate"])

    assert result.exit_code == 0, result.output
    assert "quick validation" in result.output
    assert "FAIL" not in result.output


# Test a sign error in the jump coefficient is caught by validation
def test_validate_command_detects_mutation(mocker):
    original = superoperator.jump_coefficient
    mocker.patch(
        "evolution.superoperator.jump_coefficient",
        side_effect=lambda gamma, omega, lam, tau: original(gamma, omega, -lam, tau),
    )

    result = CliRunner().invoke(cli, ["validate"])

    assert result.exit_code == 1
    assert "FAIL" in result.output
