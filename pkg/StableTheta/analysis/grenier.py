"""
StableTheta Grenier Operator
Determinant-one positive matrices, their partial decomposition (v, x, W),
Selberg power functions and the Grenier operator as a closed form and as a limit
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, InvalidFormError
from ..tools.matrix_validator import MatrixValidator
from .limits import ConvergenceReport, assess_schedule

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
DETERMINANT_TOLERANCE = 1e-10
ACTION_DETERMINANT_TOLERANCE = 1e-10

PositiveFunction = Callable[["SpecialPositiveMatrix"], complex]


@dataclass(frozen=True, eq=False)
class SpecialPositiveMatrix:
    """Symmetric positive definite Y with det Y = 1"""

    y: np.ndarray

    def __post_init__(self):
        y = np.atleast_2d(np.asarray(self.y, dtype=np.float64))
        n = y.shape[0]
        tolerance = SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(y))))
        for ok, message in (MatrixValidator.validate_real_symmetric(y, n, tolerance),
                            MatrixValidator.validate_positive_definite(y)):
            if not ok:
                raise InvalidFormError(message)
        det = float(np.linalg.det(y))
        if abs(det - 1.0) > DETERMINANT_TOLERANCE:
            raise InvalidFormError(f"det Y = {det:.12g}, expected 1")
        object.__setattr__(self, "y", (y + y.T) / 2)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> Tuple["SpecialPositiveMatrix", bool]:
        """
        Accept any symmetric positive definite matrix, scaling it to det 1

        Returns:
            Tuple of (matrix, was_renormalized)
        """
        y = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
        ok, message = MatrixValidator.validate_positive_definite((y + y.T) / 2)
        if not ok:
            raise InvalidFormError(message)
        det = float(np.linalg.det(y))
        if abs(det - 1.0) <= DETERMINANT_TOLERANCE:
            return cls(y), False
        logger.info("renormalizing det %.6g to 1 by Y / det^(1/%d)", det, y.shape[0])
        return cls(y / det ** (1.0 / y.shape[0])), True

    @property
    def n(self) -> int:
        return self.y.shape[0]

    def leading_minors(self) -> np.ndarray:
        """det Y_j for j = 1..n"""
        return np.array([np.linalg.det(self.y[:j, :j]) for j in range(1, self.n + 1)])


@dataclass(frozen=True, eq=False)
class GrenierDecomposition:
    """Y = ᵗ(1 ᵗx; 0 I)·diag(v⁻¹, v^{1/(n−1)}W)·(1 ᵗx; 0 I)"""

    v: float
    x: np.ndarray
    w: SpecialPositiveMatrix

    def __post_init__(self):
        if not self.v > 0:
            raise InvalidFormError(f"v must be positive, got {self.v}")
        x = np.asarray(self.x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.w.n:
            raise DimensionMismatchError(f"x has length {x.shape[0]}, W has size {self.w.n}")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.w.n + 1


@dataclass(frozen=True)
class PowerParameters:
    """s = (s₁, …, s_{n−1}) of the power function p_{−s}"""

    n: int
    s: Tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(complex(v) for v in self.s))
        if self.n < 1:
            raise DimensionMismatchError(f"n must be positive, got {self.n}")
        if len(self.s) != self.n - 1:
            raise DimensionMismatchError(f"n = {self.n} needs {self.n - 1} parameters, got {len(self.s)}")


def decompose(y: SpecialPositiveMatrix) -> GrenierDecomposition:
    """
    v = 1/Y₁₁, x = Y₂₁/Y₁₁, W = v^{−1/(n−1)}(Y₂₂ − Y₂₁ᵗY₂₁/Y₁₁)

    Args:
        y: Matrix of size n ≥ 2

    Returns:
        GrenierDecomposition
    """
    n = y.n
    if n < 2:
        raise DimensionMismatchError("the decomposition needs n ≥ 2")
    corner = y.y[0, 0]
    column = y.y[1:, 0]
    v = 1.0 / corner
    schur = y.y[1:, 1:] - np.outer(column, column) / corner
    return GrenierDecomposition(v, column / corner, SpecialPositiveMatrix(v ** (-1.0 / (n - 1)) * schur))


def recompose(d: GrenierDecomposition) -> SpecialPositiveMatrix:
    """The product of the decomposition, read right to left"""
    n = d.n
    y = np.empty((n, n))
    y[0, 0] = 1.0 / d.v
    y[0, 1:] = y[1:, 0] = d.x / d.v
    y[1:, 1:] = d.v ** (1.0 / (n - 1)) * d.w.y + np.outer(d.x, d.x) / d.v
    return SpecialPositiveMatrix(y)


def power_function(y: SpecialPositiveMatrix, p: PowerParameters) -> complex:
    """p_{−s}(Y) = Π_{j<n} (det Y_j)^{−s_j}, principal branch"""
    if p.n != y.n:
        raise DimensionMismatchError(f"parameters for n = {p.n} applied to a {y.n}×{y.n} matrix")
    minors = y.leading_minors()[:-1]
    return complex(np.exp(-np.sum(np.asarray(p.s) * np.log(minors)))) if p.s else 1.0 + 0.0j


def xi1(p: PowerParameters) -> complex:
    """(1/(n−1))·Σ_{k=2}^{n−1} (n−k)·s_k; zero for n = 2"""
    n = p.n
    if n < 2:
        raise DimensionMismatchError("ξ₁ needs n ≥ 2")
    return sum((n - k) * p.s[k - 1] for k in range(2, n)) / (n - 1)


def grenier_l_power(p: PowerParameters) -> PowerParameters:
    """𝔏 p_{−s} = p_{−s′} with s′ = (s₂, …, s_{n−1})"""
    if p.n < 2:
        raise DimensionMismatchError("the Grenier operator needs n ≥ 2")
    return PowerParameters(p.n - 1, p.s[1:])


def grenier_l_power_iterated(p: PowerParameters, steps: int) -> PowerParameters:
    for _ in range(steps):
        p = grenier_l_power(p)
    return p


def power_combination(terms: Sequence[Tuple[complex, PowerParameters]]) -> PositiveFunction:
    """Y ↦ Σ c·p_{−s}(Y)"""
    terms = list(terms)

    def evaluate(y: SpecialPositiveMatrix) -> complex:
        return sum(c * power_function(y, p) for c, p in terms)

    return evaluate


@dataclass(frozen=True)
class GrenierLimit:
    value: complex
    exponent: complex
    report: ConvergenceReport


def grenier_l_numeric(f: PositiveFunction, p: PowerParameters, w: SpecialPositiveMatrix, x: Sequence[float],
                      v_schedule: Sequence[float], tolerance: float = 1e-6) -> GrenierLimit:
    """
    v^{−s₁−ξ₁}·f(recompose(v, x, W)) along the schedule

    Args:
        f: Function on X_n
        p: Parameters fixing the exponent s₁ + ξ₁
        w: Matrix of size n−1
        x: Offset vector of length n−1
        v_schedule: Increasing values of v

    Returns:
        GrenierLimit with the last value and the convergence report
    """
    if w.n != p.n - 1:
        raise DimensionMismatchError(f"W has size {w.n}, expected {p.n - 1}")
    exponent = p.s[0] + xi1(p)
    values = [complex(v ** (-exponent) * f(recompose(GrenierDecomposition(v, x, w)))) for v in v_schedule]
    report = assess_schedule(v_schedule, values, tolerance)
    return GrenierLimit(report.value, exponent, report)


def gl_action(g: np.ndarray, y: SpecialPositiveMatrix) -> SpecialPositiveMatrix:
    """
    g∘Y = gYᵗg for det g = ±1

    Args:
        g: n×n real matrix
        y: Matrix of the same size

    Returns:
        The symmetrized image
    """
    g = np.atleast_2d(np.asarray(g, dtype=np.float64))
    if g.shape != (y.n, y.n):
        raise DimensionMismatchError(f"g has shape {g.shape}, expected {(y.n, y.n)}")
    det = float(np.linalg.det(g))
    if abs(abs(det) - 1.0) > ACTION_DETERMINANT_TOLERANCE:
        raise InvalidFormError(f"|det g| = {abs(det):.12g}, expected 1")
    image = g @ y.y @ g.T
    return SpecialPositiveMatrix((image + image.T) / 2)


def random_special_positive(n: int, rng: np.random.Generator, spread: float = 1.0) -> SpecialPositiveMatrix:
    """Random det-1 positive matrix A·ᵗA + I, rescaled"""
    a = rng.normal(scale=spread, size=(n, n))
    y = a @ a.T + np.eye(n)
    return SpecialPositiveMatrix(y / np.linalg.det(y) ** (1.0 / n))


def random_unimodular_real(n: int, rng: np.random.Generator, spread: float = 0.5) -> np.ndarray:
    """Random real matrix with det ±1: an orthogonal factor times a unipotent upper triangular one"""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return q @ (np.eye(n) + np.triu(rng.normal(scale=spread, size=(n, n)), 1))
