import math

import pytest

from StableTheta.analysis.limits import assess_schedule
from StableTheta.exceptions import ConvergenceError


def test_converging_schedule():
    report = assess_schedule([1, 10, 100], [1.0, 1.1, 1.11], 0.1)
    assert report.converged
    assert report.warning is None
    assert report.value == 1.11
    report.raise_if_diverged()


def test_diverging_schedule():
    report = assess_schedule([1, 10, 100], [1.0, 2.0, 4.0], 0.1)
    assert report.diverged
    assert "do not decrease" in report.warning
    with pytest.raises(ConvergenceError):
        report.raise_if_diverged()


def test_schedule_warnings():
    assert "single point" in assess_schedule([100], [1.0], 1e-6).warning
    assert "two decades" in assess_schedule([1, 2, 3], [1.0, 1.0, 1.0], 1e-6).warning
    assert "exceeds tolerance" in assess_schedule([1, 10, 100], [1.0, 1.5, 1.6], 1e-6).warning


def test_non_finite_values():
    with pytest.raises(ConvergenceError):
        assess_schedule([1, 10, 100], [1.0, math.inf, 1.0], 1e-6)
