"""
StableTheta Helper Utilities
Exact integer linear algebra, input parsing and display helpers
"""

import logging
import math
import re
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

Number = Union[int, Fraction]
IntMatrix = Tuple[Tuple[int, ...], ...]

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str = "WARNING") -> None:
    """
    Configure the root logger once; later calls only change the level

    Args:
        level: Logging level name such as "INFO" or "DEBUG"
    """
    root = logging.getLogger()
    numeric = getattr(logging, str(level).upper(), logging.WARNING)
    if not root.handlers:
        logging.basicConfig(level=numeric, format=LOG_FORMAT)
    root.setLevel(numeric)


def bareiss_determinant(matrix: Sequence[Sequence[Number]]) -> Number:
    """
    Exact determinant by fraction-free (Bareiss) elimination with row pivoting

    Args:
        matrix: Square matrix of ints (or Fractions)

    Returns:
        The determinant; an int whenever the input is integral
    """
    n = len(matrix)
    if n == 0:
        return 1
    m = [list(row) for row in matrix]
    if any(len(row) != n for row in m):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                value = m[i][j] * pivot - m[i][k] * m[k][j]
                # exact division is the Bareiss invariant
                m[i][j] = value // prev if isinstance(value, int) and isinstance(prev, int) else value / prev
            m[i][k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def leading_minors(matrix: Sequence[Sequence[Number]]) -> List[Number]:
    """Exact upper-left k×k determinants for k = 1..n"""
    n = len(matrix)
    return [bareiss_determinant([row[:k] for row in matrix[:k]]) for k in range(1, n + 1)]


def exact_inverse(matrix: Sequence[Sequence[int]]) -> List[List[Fraction]]:
    """Gauss-Jordan inverse over the rationals"""
    n = len(matrix)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot_row = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot_row is None:
            raise ValueError("matrix is singular")
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        pivot = aug[col][col]
        aug[col] = [v / pivot for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    """Exact product of integer matrices"""
    if a and len(a[0]) != len(b):
        raise ValueError("incompatible shapes")
    cols = list(zip(*b)) if b else []
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def _transpose(a: Sequence[Sequence[int]]) -> IntMatrix:
    """Transpose of a rectangular matrix"""
    return tuple(tuple(col) for col in zip(*a))


def congruence(t: Sequence[Sequence[int]], u: Sequence[Sequence[int]]) -> IntMatrix:
    """ᵗU·T·U, the B[A] notation of the quadratic-form literature"""
    return _mat_mul(_mat_mul(_transpose(u), t), u)


def parse_number_list(text: str) -> List[float]:
    """
    Parse a comma- or whitespace-separated list of numbers

    Args:
        text: e.g. "100,1000,1e4"

    Returns:
        List of floats
    """
    tokens = [tok for tok in re.split(r"[,\s]+", text.strip()) if tok]
    if not tokens:
        raise ValueError("empty number list")
    try:
        return [float(tok) for tok in tokens]
    except ValueError as exc:
        raise ValueError(f"malformed number list {text!r}: {exc}") from None


def parse_square_matrix(text: str) -> List[List[float]]:
    """
    Parse a row-major number list into a square matrix

    Rows may also be separated by ';' in which case each row is checked.

    Args:
        text: e.g. "2,1,1,1" or "2 1; 1 1"

    Returns:
        Nested list of floats
    """
    if ";" in text:
        rows = [parse_number_list(chunk) for chunk in text.split(";") if chunk.strip()]
        if any(len(row) != len(rows) for row in rows):
            raise ValueError(f"matrix rows of unequal length in {text!r}")
        return rows
    values = parse_number_list(text)
    n = math.isqrt(len(values))
    if n * n != len(values):
        raise ValueError(f"{len(values)} entries do not form a square matrix")
    return [values[i * n:(i + 1) * n] for i in range(n)]


def format_upper_triangle(t: Sequence[Sequence[int]]) -> str:
    """Upper triangle entries row by row, space separated"""
    n = len(t)
    return " ".join(str(t[i][j]) for i in range(n) for j in range(i, n))


def format_matrix_for_display(matrix: Sequence[Sequence[float]], digits: int = 6, max_length: int = 120) -> str:
    """
    Format a matrix on one line for reports, truncating long output

    Args:
        matrix: Matrix to render
        digits: Significant digits per entry
        max_length: Maximum length before truncation

    Returns:
        String like "[[2, 1]; [1, 1]]"
    """
    text = "[" + "; ".join("[" + ", ".join(f"{float(v):.{digits}g}" for v in row) + "]" for row in matrix) + "]"
    if len(text) <= max_length:
        return text
    return text[:max_length - 3] + "..."
