"""
StableTheta Reports
Plain-text tables for coefficients, stability, operator checks and limits
"""

from typing import Iterable, List, Sequence

import numpy as np
import pandas as pd

from ..analysis.grenier import GrenierDecomposition
from ..analysis.limits import ConvergenceReport
from ..analysis.symplectic import OperatorSuiteReport
from ..forms.fourier import Expansion, FourierIndex
from ..forms.siegel import CuspReport, OperatorRegime, StabilityReport
from ..utils.helpers import format_matrix_for_display, format_upper_triangle


def render(frame: pd.DataFrame) -> str:
    """Fixed-width rendering without the row index"""
    if frame.empty:
        return "(no rows)"
    return frame.to_string(index=False)


def format_complex(value: complex, digits: int = 12) -> str:
    value = complex(value) + 0j  # drops negative zeros
    return f"{value.real:.{digits}g}{value.imag:+.{digits}g}i"


def format_index(index: FourierIndex) -> str:
    return format_upper_triangle(index.t) if index.genus else "()"


def expansion_header(expansion: Expansion) -> str:
    weight = expansion.weight
    weight_text = str(weight.numerator) if weight.denominator == 1 else f"{weight.numerator}/{weight.denominator}"
    return (f"{expansion.label or 'expansion'} genus={expansion.genus} weight={weight_text} "
            f"trace_bound={expansion.trace_bound}")


def coefficient_table(expansion: Expansion) -> pd.DataFrame:
    """One row per index in graded order"""
    rows = [
        {"trace": index.trace, "index": format_index(index), "coefficient": str(value)}
        for index, value in expansion.coeffs.items()
    ]
    return pd.DataFrame(rows, columns=["trace", "index", "coefficient"])


def stability_table(report: StabilityReport) -> pd.DataFrame:
    rows = [
        {"pair": f"{pair.upper_genus}->{pair.lower_genus}", "failures": len(pair.failures),
         "verdict": "coherent" if pair.coherent else "FAILED"}
        for pair in report.pairs
    ]
    return pd.DataFrame(rows, columns=["pair", "failures", "verdict"])


def failure_table(report: StabilityReport) -> pd.DataFrame:
    rows = [
        {"pair": f"{pair.upper_genus}->{pair.lower_genus}", "index": format_index(failure.index),
         "expected": str(failure.expected), "phi": str(failure.actual)}
        for pair in report.pairs for failure in pair.failures
    ]
    return pd.DataFrame(rows, columns=["pair", "index", "expected", "phi"])


def regime_table(regimes: Iterable[OperatorRegime]) -> pd.DataFrame:
    rows = [
        {"weight": r.weight, "genus": r.genus, "injective": r.injective, "isomorphism": r.isomorphism,
         "maass": r.maass_isomorphism}
        for r in regimes
    ]
    return pd.DataFrame(rows, columns=["weight", "genus", "injective", "isomorphism", "maass"])


def cusp_lines(report: CuspReport) -> List[str]:
    if report.passed:
        return [f"singular coefficients all zero ({report.checked} singular indices checked)"]
    lines = [f"singular coefficients nonzero at {len(report.violations)} of {report.checked} indices"]
    lines += [f"  T = {format_index(index)}: {value}" for index, value in report.violations]
    return lines


def deviation_table(suite: OperatorSuiteReport) -> pd.DataFrame:
    rows = [
        {"check": check.name, "samples": check.samples, "max deviation": f"{check.deviation:.3e}",
         "tolerance": f"{check.tolerance:.1e}", "verdict": "ok" if check.passed else "FAILED"}
        for check in suite.checks
    ]
    return pd.DataFrame(rows, columns=["check", "samples", "max deviation", "tolerance", "verdict"])


def convergence_table(report: ConvergenceReport) -> pd.DataFrame:
    differences: Sequence[float] = (float("nan"),) + tuple(report.differences)
    rows = [
        {"point": f"{point:g}", "value": format_complex(value), "difference": f"{difference:.3e}"}
        for point, value, difference in zip(report.points, report.values, differences)
    ]
    return pd.DataFrame(rows, columns=["point", "value", "difference"])


def decomposition_lines(decomposition: GrenierDecomposition, error: float) -> List[str]:
    return [
        f"v = {decomposition.v:.12g}",
        f"x = {np.array2string(decomposition.x, precision=12)}",
        f"W = {format_matrix_for_display(decomposition.w.y, digits=12, max_length=400)}",
        f"reconstruction error = {error:.3e}",
    ]
