"""
StableTheta Quadratic Forms
Exact Gram matrices of even unimodular lattices and their verification
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple

from ..exceptions import ConstructionError, DimensionMismatchError, InvalidFormError
from ..tools.matrix_validator import MatrixValidator
from ..utils.helpers import IntMatrix, exact_inverse, leading_minors

logger = logging.getLogger(__name__)

# Edges of the E8 Dynkin diagram, Bourbaki numbering shifted to 0-based
E8_DYNKIN_EDGES = ((0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3))


@dataclass(frozen=True)
class QuadraticForm:
    """An integral symmetric Gram matrix with a short label; immutable"""

    label: str
    gram: IntMatrix

    def __post_init__(self):
        for check in (MatrixValidator.validate_square, MatrixValidator.validate_integral, MatrixValidator.validate_symmetric):
            ok, message = check(self.gram)
            if not ok:
                raise InvalidFormError(f"form {self.label}: {message}")
        if not self.gram:
            raise InvalidFormError(f"form {self.label}: rank must be positive")
        object.__setattr__(self, "gram", tuple(tuple(int(v) for v in row) for row in self.gram))

    @property
    def dim(self) -> int:
        return len(self.gram)

    def inverse_diagonal(self) -> List[Fraction]:
        """Exact diagonal of the inverse Gram matrix (the dual form)"""
        inverse = exact_inverse(self.gram)
        return [inverse[i][i] for i in range(self.dim)]

    def __str__(self) -> str:
        return format_form(self)


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of verify_even_unimodular; passed iff every flag holds"""

    label: str
    symmetric: bool
    even_diagonal: bool
    positive_definite: bool
    unimodular: bool
    rank_divisible_by_8: bool
    determinant: int
    minors: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all((self.symmetric, self.even_diagonal, self.positive_definite, self.unimodular, self.rank_divisible_by_8))

    def failures(self) -> List[str]:
        """Human readable list of the failed conditions"""
        messages = []
        if not self.symmetric:
            messages.append("gram is not symmetric")
        if not self.even_diagonal:
            messages.append("a diagonal entry is odd")
        if not self.positive_definite:
            messages.append(f"not positive definite (leading minors {list(self.minors)})")
        if not self.unimodular:
            messages.append(f"det = {self.determinant}, expected 1")
        if not self.rank_divisible_by_8:
            messages.append("rank is not divisible by 8")
        return messages


def verify_even_unimodular(q: QuadraticForm) -> VerificationReport:
    """
    Check symmetry, evenness, positive definiteness, det = 1 and rank ≡ 0 mod 8

    Args:
        q: Form to verify

    Returns:
        VerificationReport with one flag per condition
    """
    symmetric, _ = MatrixValidator.validate_symmetric(q.gram)
    even, _ = MatrixValidator.validate_even_diagonal(q.gram)
    minors = tuple(leading_minors(q.gram))
    determinant = minors[-1]
    report = VerificationReport(
        label=q.label,
        symmetric=symmetric,
        even_diagonal=even,
        positive_definite=all(m > 0 for m in minors),
        unimodular=determinant == 1,
        rank_divisible_by_8=q.dim % 8 == 0,
        determinant=determinant,
        minors=minors,
    )
    logger.debug("verified form %s: passed=%s det=%s", q.label, report.passed, determinant)
    return report


def evaluate(q: QuadraticForm, x: Sequence[int], y: Sequence[int]) -> int:
    """
    Bilinear value ᵗx·gram·y, exact

    Args:
        q: Quadratic form
        x: Integer vector of length rank
        y: Integer vector of length rank

    Returns:
        The exact integer ᵗx·gram·y; evaluate(q, x, x) is the norm of x
    """
    for vector in (x, y):
        ok, message = MatrixValidator.validate_vector(vector, q.dim)
        if not ok:
            raise DimensionMismatchError(f"form {q.label}: {message}")
    total = 0
    for i, xi in enumerate(x):
        if xi:
            row = q.gram[i]
            total += int(xi) * sum(row[j] * int(yj) for j, yj in enumerate(y) if yj)
    return total


@lru_cache(maxsize=None)
def make_e8() -> QuadraticForm:
    """The E8 root lattice with the Cartan matrix as Gram matrix"""
    gram = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i, j in E8_DYNKIN_EDGES:
        gram[i][j] = gram[j][i] = -1
    form = QuadraticForm("E8", tuple(map(tuple, gram)))
    _require_verified(form)
    return form


def _unit(i: int, dim: int = 16) -> List[Fraction]:
    vector = [Fraction(0)] * dim
    vector[i] = Fraction(1)
    return vector


def _combine(a: List[Fraction], b: List[Fraction], sign: int) -> List[Fraction]:
    return [x + sign * y for x, y in zip(a, b)]


def _gram_of(basis: Sequence[Sequence[Fraction]], label: str) -> QuadraticForm:
    rows = []
    for u in basis:
        row = []
        for v in basis:
            value = sum(a * b for a, b in zip(u, v))
            if value.denominator != 1:
                raise ConstructionError(f"{label}: non-integral inner product {value}")
            row.append(int(value))
        rows.append(tuple(row))
    return QuadraticForm(label, tuple(rows))


def d16_plus_candidate_bases() -> List[Tuple[str, List[List[Fraction]]]]:
    """
    Bases tried, in order, when building D16+ in the coordinate model

    The first is {e1−e2, …, e14−e15, e15+e16, s}; the following ones restore
    e15−e16 and drop the chain generator e_i−e_{i+1} for i = 1, 2, ….
    """
    chain = [_combine(_unit(i), _unit(i + 1), -1) for i in range(15)]
    e15_plus_e16 = _combine(_unit(14), _unit(15), 1)
    glue = [Fraction(1, 2)] * 16
    candidates = [("chain without e15-e16", chain[:14] + [e15_plus_e16, glue])]
    for i in range(14):
        basis = [glue] + chain[:i] + chain[i + 1:] + [e15_plus_e16]
        candidates.append((f"chain without e{i + 1}-e{i + 2}", basis))
    return candidates


@lru_cache(maxsize=None)
def d16_plus_basis() -> Tuple[Tuple[Fraction, ...], ...]:
    """Coordinate basis of D16+ whose Gram matrix passes verification"""
    for description, basis in d16_plus_candidate_bases():
        form = _gram_of(basis, "D16PLUS")
        report = verify_even_unimodular(form)
        if report.passed:
            if description != "chain without e15-e16":
                logger.info("D16+ glue basis corrected: using %s (stated basis failed)", description)
            return tuple(tuple(v) for v in basis)
        logger.info("D16+ candidate basis '%s' rejected: %s", description, "; ".join(report.failures()))
    raise ConstructionError("no candidate glue basis for D16+ passed verification")


@lru_cache(maxsize=None)
def make_d16_plus() -> QuadraticForm:
    """The rank-16 lattice D16+ = D16 ∪ (D16 + ½(1,…,1))"""
    form = _gram_of(d16_plus_basis(), "D16PLUS")
    _require_verified(form)
    return form


def direct_sum(a: QuadraticForm, b: QuadraticForm) -> QuadraticForm:
    """Block-diagonal Gram matrix of a ⊕ b; labels are concatenated"""
    rows = [row + (0,) * b.dim for row in a.gram]
    rows += [(0,) * a.dim + row for row in b.gram]
    return QuadraticForm(a.label + b.label, tuple(rows))


@lru_cache(maxsize=None)
def make_e8_e8() -> QuadraticForm:
    """E8 ⊕ E8"""
    return direct_sum(make_e8(), make_e8())


def form_by_label(label: str) -> QuadraticForm:
    """
    Resolve a CLI form label

    Args:
        label: One of E8, E8E8, D16PLUS

    Returns:
        The verified QuadraticForm
    """
    builders = {"E8": make_e8, "E8E8": make_e8_e8, "D16PLUS": make_d16_plus}
    try:
        return builders[label.upper()]()
    except KeyError:
        raise InvalidFormError(f"unknown form label {label!r}; expected one of {', '.join(builders)}") from None


def _require_verified(form: QuadraticForm) -> None:
    report = verify_even_unimodular(form)
    if not report.passed:
        raise ConstructionError(f"form {form.label} failed verification: {'; '.join(report.failures())}")


def format_form(q: QuadraticForm) -> str:
    """Text block: 'form <label> rank <r>' followed by the Gram rows"""
    lines = [f"form {q.label} rank {q.dim}"]
    lines += [" ".join(str(v) for v in row) for row in q.gram]
    return "\n".join(lines) + "\n"


def parse_form(text: str) -> QuadraticForm:
    """
    Parse the text block written by format_form

    Args:
        text: Block starting with the 'form' header line

    Returns:
        QuadraticForm (not verified)
    """
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines:
        raise InvalidFormError("empty form block")
    header = lines[0].split()
    if len(header) != 4 or header[0] != "form" or header[2] != "rank":
        raise InvalidFormError(f"malformed form header {lines[0]!r}")
    label, rank = header[1], int(header[3])
    rows = lines[1:]
    if len(rows) != rank:
        raise InvalidFormError(f"form {label}: expected {rank} rows, found {len(rows)}")
    try:
        gram = tuple(tuple(int(tok) for tok in row.split()) for row in rows)
    except ValueError as exc:
        raise InvalidFormError(f"form {label}: {exc}") from None
    return QuadraticForm(label, gram)
