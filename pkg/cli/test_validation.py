import math

import pytest

from cli.validation import (
    SUPPRESSION_RATIO,
    ValidationReport,
    _qualitative_checks,
    _ratio,
    _run_check,
)


# Test a check whose measurement raises is recorded as a failure
def test_run_check_records_unexpected_error(mocker):
    mock_logger = mocker.patch("cli.validation.logger")
    report = ValidationReport("quick")

    def broken():
        return 1.0 / 0.0

    check = _run_check(report, "broken", 1.0, broken)

    assert report.checks == [check]
    assert not check.passed
    assert math.isnan(check.value)
    assert not report.passed
    mock_logger.error.assert_called_once()
    assert "ZeroDivisionError" in mock_logger.error.call_args[0][0]


# Test upper and lower thresholds
def test_run_check_thresholds():
    report = ValidationReport("quick")

    assert _run_check(report, "small", 1.0, lambda: 0.5).passed
    assert not _run_check(report, "large", 1.0, lambda: 2.0).passed
    assert _run_check(report, "floor", 1.0, lambda: 2.0, upper=False).passed


# Test ratios refuse a vanishing reference
def test_ratio_rejects_zero_denominator():
    assert _ratio(0.5, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        _ratio(1e-17, 5e-16)


# Test the damping trends hold on the default parameter set
def test_qualitative_checks_pass():
    report = ValidationReport("full")

    _qualitative_checks(report)

    assert len(report.checks) == 6
    assert report.passed, report.lines()
    by_name = {check.name: check for check in report.checks}
    assert by_name["lossy second cavity lowers max C_AF2"].value < SUPPRESSION_RATIO
    assert by_name["lossy first cavity lowers max C_AF1"].value < SUPPRESSION_RATIO
    assert by_name["C_AF1 survives a lossy second cavity"].value > 0.1
