"""
StableTheta Limit Schedules
Convergence reports for limits replaced by finite schedules
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ..exceptions import ConvergenceError

logger = logging.getLogger(__name__)

# Relative slack when comparing successive differences
DIFFERENCE_SLACK = 1e-12


@dataclass(frozen=True)
class ConvergenceReport:
    """Values along an increasing schedule and their successive differences"""

    points: Tuple[float, ...]
    values: Tuple[complex, ...]
    differences: Tuple[float, ...]
    tolerance: float

    @property
    def value(self) -> complex:
        return self.values[-1]

    @property
    def diverged(self) -> bool:
        scale = max((abs(v) for v in self.values), default=1.0)
        slack = DIFFERENCE_SLACK * max(1.0, scale)
        return any(later > earlier + slack for earlier, later in zip(self.differences, self.differences[1:]))

    @property
    def converged(self) -> bool:
        return bool(self.differences) and not self.diverged and self.differences[-1] <= self.tolerance

    @property
    def warning(self) -> Optional[str]:
        if len(self.points) < 2:
            return "schedule has a single point; convergence not assessed"
        if self.diverged:
            return "successive differences do not decrease"
        if self.points[-1] < 100 * self.points[0]:
            return "schedule spans less than two decades"
        if self.differences[-1] > self.tolerance:
            return f"last difference {self.differences[-1]:.3e} exceeds tolerance {self.tolerance:.1e}"
        return None

    def raise_if_diverged(self) -> None:
        if self.diverged:
            raise ConvergenceError(f"no convergence along {list(self.points)}: differences {list(self.differences)}")


def assess_schedule(points: Sequence[float], values: Sequence[complex], tolerance: float) -> ConvergenceReport:
    """
    Build the report for values computed at the schedule points

    Args:
        points: Increasing schedule
        values: One value per point
        tolerance: Bound on the last successive difference

    Returns:
        ConvergenceReport
    """
    differences = tuple(abs(b - a) for a, b in zip(values, values[1:]))
    report = ConvergenceReport(tuple(float(p) for p in points), tuple(values), differences, tolerance)
    if report.warning:
        logger.warning("limit schedule %s: %s", list(report.points), report.warning)
    if any(not math.isfinite(abs(v)) for v in values):
        raise ConvergenceError(f"non-finite value along schedule {list(points)}")
    return report
