"""
StableTheta Fourier Expansions
Fourier indices, representation numbers r(T, Q), truncated theta expansions
and their plain-text format
"""

import hashlib
import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import (
    CacheFormatError,
    ConfigurationError,
    DimensionMismatchError,
    InvalidFormError,
    InvalidIndexError,
)
from ..lattice.enumeration import (
    NodeBudget,
    constrained_extend,
    count_by_norm,
    inner_product_histogram,
    pair_count,
    vectors_of_norm,
)
from ..lattice.qforms import QuadraticForm, verify_even_unimodular
from ..tools.matrix_validator import MatrixValidator
from ..utils.helpers import IntMatrix, bareiss_determinant, congruence, format_upper_triangle
from ..utils.workers import parallel_map

logger = logging.getLogger(__name__)

HEADER_PREFIX = "expansion"
CHECKSUM_PREFIX = "checksum sha256="


def _is_psd(t: Sequence[Sequence[int]]) -> bool:
    """Exact semidefiniteness test by symmetric elimination; a zero pivot needs a zero row"""
    n = len(t)
    a = [[Fraction(v) for v in row] for row in t]
    for k in range(n):
        pivot = a[k][k]
        if pivot < 0:
            return False
        if pivot == 0:
            if any(a[k][j] != 0 for j in range(k + 1, n)):
                return False
            continue
        for i in range(k + 1, n):
            factor = a[i][k] / pivot
            if factor:
                for j in range(k + 1, n):
                    a[i][j] -= factor * a[k][j]
    return True


@dataclass(frozen=True)
class FourierIndex:
    """Even-integral symmetric positive semidefinite matrix t; the coefficient of e^{πi tr(tZ)}"""

    t: IntMatrix

    def __post_init__(self):
        for check in (MatrixValidator.validate_square, MatrixValidator.validate_integral,
                      MatrixValidator.validate_symmetric, MatrixValidator.validate_even_diagonal):
            ok, message = check(self.t)
            if not ok:
                raise InvalidIndexError(message)
        t = tuple(tuple(int(v) for v in row) for row in self.t)
        n = len(t)
        for i in range(n):
            if t[i][i] < 0:
                raise InvalidIndexError(f"diagonal entry {i} = {t[i][i]} is negative")
            for j in range(i + 1, n):
                if abs(t[i][j]) > math.isqrt(t[i][i] * t[j][j]):
                    raise InvalidIndexError(f"|t[{i}][{j}]| = {abs(t[i][j])} exceeds √(t_ii·t_jj)")
        if not _is_psd(t):
            raise InvalidIndexError(f"{format_upper_triangle(t)} is not positive semidefinite")
        object.__setattr__(self, "t", t)

    @classmethod
    def _trusted(cls, t: IntMatrix) -> "FourierIndex":
        index = object.__new__(cls)
        object.__setattr__(index, "t", t)
        return index

    @classmethod
    def zero(cls, n: int) -> "FourierIndex":
        return cls._trusted(tuple((0,) * n for _ in range(n)))

    @classmethod
    def from_upper_triangle(cls, n: int, entries: Sequence[int]) -> "FourierIndex":
        """Build from the row-major upper triangle, the order used in cache files"""
        if len(entries) != n * (n + 1) // 2:
            raise InvalidIndexError(f"genus {n} needs {n * (n + 1) // 2} entries, got {len(entries)}")
        t = [[0] * n for _ in range(n)]
        values = iter(entries)
        for i in range(n):
            for j in range(i, n):
                t[i][j] = t[j][i] = int(next(values))
        return cls(tuple(map(tuple, t)))

    @property
    def genus(self) -> int:
        return len(self.t)

    @property
    def trace(self) -> int:
        return sum(self.t[i][i] for i in range(self.genus))

    @property
    def diagonal(self) -> Tuple[int, ...]:
        return tuple(self.t[i][i] for i in range(self.genus))

    def upper_triangle(self) -> Tuple[int, ...]:
        n = self.genus
        return tuple(self.t[i][j] for i in range(n) for j in range(i, n))

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Graded order: trace first, then the upper triangle lexicographically"""
        return self.trace, self.upper_triangle()

    def determinant(self) -> int:
        return bareiss_determinant(self.t)

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.t)

    def with_zero_border(self) -> "FourierIndex":
        """t ⊕ 0, one genus higher"""
        rows = tuple(row + (0,) for row in self.t)
        return FourierIndex._trusted(rows + ((0,) * (self.genus + 1),))

    def principal(self, indices: Sequence[int]) -> "FourierIndex":
        """Principal submatrix on the given rows and columns"""
        return FourierIndex._trusted(tuple(tuple(self.t[i][j] for j in indices) for i in indices))

    def last_border_is_zero(self) -> bool:
        return self.genus > 0 and not any(self.t[-1])

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(v) for v in row) for row in self.t) + "]"


def _even_diagonals(n: int, bound: int) -> Iterable[Tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(0, bound + 1, 2):
        for rest in _even_diagonals(n - 1, bound - first):
            yield (first,) + rest


def enumerate_indices(n: int, bound: int) -> List[FourierIndex]:
    """
    Every Fourier index of genus n with trace ≤ bound

    Args:
        n: Genus (0 gives the single empty index)
        bound: Even nonnegative trace bound

    Returns:
        Indices in graded order
    """
    if n < 0:
        raise InvalidIndexError(f"genus must be nonnegative, got {n}")
    if bound < 0 or bound % 2:
        raise InvalidIndexError(f"trace bound must be even and nonnegative, got {bound}")
    return list(_indices_cached(n, bound))


@lru_cache(maxsize=64)
def _indices_cached(n: int, bound: int) -> Tuple[FourierIndex, ...]:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    found = []
    for diag in _even_diagonals(n, bound):
        ranges = [range(-math.isqrt(diag[i] * diag[j]), math.isqrt(diag[i] * diag[j]) + 1) for i, j in pairs]
        for offdiag in itertools.product(*ranges):
            t = [[diag[i] if i == j else 0 for j in range(n)] for i in range(n)]
            for (i, j), value in zip(pairs, offdiag):
                t[i][j] = t[j][i] = value
            if _is_psd(t):
                found.append(FourierIndex._trusted(tuple(tuple(int(v) for v in row) for row in t)))
    found.sort(key=FourierIndex.sort_key)
    logger.debug("enumerated %d indices of genus %d up to trace %d", len(found), n, bound)
    return tuple(found)


@lru_cache(maxsize=64)
def stratum_size(n: int, trace: int) -> int:
    """Number of genus-n indices of exactly the given trace"""
    if trace < 0 or trace % 2:
        return 0
    return sum(1 for index in _indices_cached(n, trace) if index.trace == trace)


def singular_indices(n: int, bound: int) -> List[FourierIndex]:
    """Indices of genus n and trace ≤ bound with determinant zero"""
    return [index for index in enumerate_indices(n, bound) if is_singular(index)]


def is_singular(index: FourierIndex) -> bool:
    """
    True iff det(t) = 0, exactly

    The genus-0 index has determinant 1 and is not singular.
    """
    return index.determinant() == 0


def unimodular_transform(index: FourierIndex, u: Sequence[Sequence[int]]) -> FourierIndex:
    """
    ᵗU·t·U for an integral U with det ±1

    Args:
        index: Fourier index of genus n
        u: n×n integer matrix

    Returns:
        The transformed FourierIndex
    """
    for check in (MatrixValidator.validate_square, MatrixValidator.validate_integral):
        ok, message = check(u)
        if not ok:
            raise InvalidIndexError(f"transform: {message}")
    if len(u) != index.genus:
        raise DimensionMismatchError(f"transform is {len(u)}×{len(u)}, index has genus {index.genus}")
    det = bareiss_determinant(u)
    if det not in (1, -1):
        raise InvalidIndexError(f"transform is not unimodular (det = {det})")
    return FourierIndex(congruence(index.t, u))


def canonical_index(index: FourierIndex) -> FourierIndex:
    """
    Class representative under signed permutations, zero rows removed

    r(T, Q) is constant on these classes, so the result serves as a
    deduplication key; it is never written to a cache.
    """
    keep = [i for i in range(index.genus) if index.t[i][i]]
    t = index.principal(keep).t
    k = len(keep)
    if k == 0:
        return FourierIndex.zero(0)
    best = None
    for perm in itertools.permutations(range(k)):
        for tail_signs in itertools.product((1, -1), repeat=k - 1):
            signs = (1,) + tail_signs
            tri = tuple(signs[a] * signs[b] * t[perm[a]][perm[b]] for a in range(k) for b in range(a, k))
            if best is None or tri < best:
                best = tri
    rows = [[0] * k for _ in range(k)]
    values = iter(best)
    for i in range(k):
        for j in range(i, k):
            rows[i][j] = rows[j][i] = next(values)
    return FourierIndex._trusted(tuple(map(tuple, rows)))


def _extend_columns(q: QuadraticForm, depth: int, candidates: List[np.ndarray], t: IntMatrix,
                    gram: np.ndarray, budget: NodeBudget) -> int:
    k = len(t)
    budget.charge(len(candidates[0]))
    if k - depth == 2:
        return pair_count(candidates[0], candidates[1], gram, t[depth][depth + 1])
    total = 0
    for v in candidates[0]:
        narrowed = []
        # each pool already satisfies the columns fixed above this depth
        for offset, pool in enumerate(candidates[1:], start=depth + 1):
            pool = constrained_extend(q, [v], t[offset][offset], [t[depth][offset]], pool=pool)
            if not len(pool):
                break
            narrowed.append(pool)
        else:
            total += _extend_columns(q, depth + 1, narrowed, t, gram, budget)
    return total


def representation_count(q: QuadraticForm, index: FourierIndex, budget: Optional[NodeBudget] = None) -> int:
    """
    r(T, Q) = #{G ∈ ℤ^{r×n} : ᵗG·Q·G = t}

    Zero columns are dropped (a positive definite form has no nonzero vector
    of norm 0). The rest are processed by ascending diagonal: column-by-column
    backtracking, each later column narrowed by constrained_extend, over all
    but the last two columns, which are counted together. The first column
    runs over one vector of each ±v pair and the total is doubled.

    Args:
        q: Positive definite form
        index: Fourier index
        budget: Node budget

    Returns:
        Exact count
    """
    budget = budget or NodeBudget()
    keep = [i for i in range(index.genus) if index.t[i][i]]
    if not keep:
        return 1
    # ascending diagonal: small shells drive the backtracking, the largest two meet in pair_count
    order = sorted(keep, key=lambda i: (index.t[i][i], i))
    t = index.principal(order).t
    k = len(t)
    if k == 1:
        return count_by_norm(q, t[0][0], budget)
    if k == 2:
        return inner_product_histogram(q, t[0][0], t[1][1], budget).get(t[0][1], 0)
    gram = np.array(q.gram, dtype=np.float64)
    shells = [vectors_of_norm(q, t[i][i], budget) for i in range(k)]
    candidates = [shells[0].positive_half()] + [shell.vectors for shell in shells[1:]]
    return 2 * _extend_columns(q, 0, candidates, t, gram, budget)


@dataclass(frozen=True)
class Expansion:
    """
    Truncated Fourier expansion Σ a(T) e^{πi tr(TZ)} over indices of trace ≤ trace_bound

    A complete expansion carries every index up to the bound, zeros included;
    a restricted one (complete=False) carries a chosen subset.
    """

    genus: int
    weight: Fraction
    trace_bound: int
    coeffs: Dict[FourierIndex, int]
    label: str = ""
    complete: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.genus < 0:
            raise InvalidIndexError(f"genus must be nonnegative, got {self.genus}")
        if self.trace_bound < 0 or self.trace_bound % 2:
            raise InvalidIndexError(f"trace bound must be even and nonnegative, got {self.trace_bound}")
        for index in self.coeffs:
            if index.genus != self.genus:
                raise DimensionMismatchError(f"index {index} does not have genus {self.genus}")
            if index.trace > self.trace_bound:
                raise InvalidIndexError(f"index {index} exceeds trace bound {self.trace_bound}")
        ordered = {index: int(self.coeffs[index]) for index in sorted(self.coeffs, key=FourierIndex.sort_key)}
        object.__setattr__(self, "coeffs", ordered)

    @classmethod
    def zero(cls, genus: int, weight: Fraction, trace_bound: int, label: str = "") -> "Expansion":
        return cls(genus, weight, trace_bound, {index: 0 for index in enumerate_indices(genus, trace_bound)}, label)

    def coefficient(self, index: FourierIndex) -> int:
        if index in self.coeffs:
            return self.coeffs[index]
        if self.complete and index.genus == self.genus and index.trace <= self.trace_bound:
            return 0
        raise InvalidIndexError(f"index {index} is outside this expansion")

    def indices(self) -> List[FourierIndex]:
        return list(self.coeffs)

    def nonzero_items(self) -> List[Tuple[FourierIndex, int]]:
        return [(index, value) for index, value in self.coeffs.items() if value]

    def is_zero(self) -> bool:
        return not any(self.coeffs.values())

    def max_abs_coefficient(self) -> int:
        return max((abs(v) for v in self.coeffs.values()), default=0)


def constant_expansion(genus: int, value: int, trace_bound: int, label: str = "CONST") -> Expansion:
    """The weight-0 expansion of a constant function"""
    coeffs = {index: (value if index.is_zero() else 0) for index in enumerate_indices(genus, trace_bound)}
    return Expansion(genus, Fraction(0), trace_bound, coeffs, label)


def _require_even_unimodular(q: QuadraticForm) -> None:
    report = verify_even_unimodular(q)
    if not report.passed:
        raise InvalidFormError(f"form {q.label} is not even unimodular: {'; '.join(report.failures())}")


def _count_task(args: Tuple[QuadraticForm, FourierIndex, int]) -> Tuple[int, int]:
    q, index, limit = args
    budget = NodeBudget(limit)
    return representation_count(q, index, budget), budget.used


def theta_expansion(q: QuadraticForm, n: int, bound: int, indices: Optional[Sequence[FourierIndex]] = None,
                    budget: Optional[NodeBudget] = None, allow_full_genus4: bool = False,
                    canonicalize: bool = True, workers: int = 1,
                    memo: Optional[Dict[Tuple[IntMatrix, FourierIndex], int]] = None) -> Expansion:
    """
    Truncated theta series θ_{Q,n}: coefficient r(T, Q) at every index

    Args:
        q: Even unimodular form
        n: Genus; genus 0 gives the constant 1
        bound: Trace bound
        indices: Optional subset of indices; the result is then restricted
        budget: Node budget; exhaustion raises and no expansion is returned
        allow_full_genus4: Permit complete tables at genus 4 and above
        canonicalize: Count once per signed-permutation class
        workers: Processes for independent counts
        memo: Shared count memo, keyed by form and class

    Returns:
        Expansion of weight rank/2
    """
    _require_even_unimodular(q)
    budget = budget or NodeBudget()
    if indices is None:
        if n >= 4 and not allow_full_genus4:
            raise ConfigurationError(f"complete genus-{n} tables need allow_full_genus4 (or an explicit index set)")
        targets = enumerate_indices(n, bound)
        complete = True
    else:
        targets = list(indices)
        for index in targets:
            if index.genus != n or index.trace > bound:
                raise InvalidIndexError(f"index {index} is not a genus-{n} index within trace {bound}")
        complete = False
    memo = {} if memo is None else memo
    keys = {index: (canonical_index(index) if canonicalize else index) for index in targets}
    pending = []
    for key in keys.values():
        if (q.gram, key) not in memo and key not in pending:
            pending.append(key)
    logger.info("theta %s genus %d bound %d: %d indices, %d new counts", q.label, n, bound, len(targets), len(pending))
    if workers > 1 and len(pending) > 1:
        results = parallel_map(_count_task, [(q, key, budget.remaining) for key in pending], workers)
        budget.charge(sum(used for _, used in results))
        for key, (count, _) in zip(pending, results):
            memo[(q.gram, key)] = count
    else:
        for key in pending:
            memo[(q.gram, key)] = representation_count(q, key, budget)
    coeffs = {index: memo[(q.gram, keys[index])] for index in targets}
    return Expansion(n, Fraction(q.dim, 2), bound, coeffs, q.label, complete)


def expansion_sub(a: Expansion, b: Expansion) -> Expansion:
    """
    Coefficient-wise difference a − b

    Args:
        a: Minuend
        b: Subtrahend with the same genus, weight, bound and index set

    Returns:
        Expansion labelled "<a>-<b>"
    """
    for name in ("genus", "weight", "trace_bound"):
        if getattr(a, name) != getattr(b, name):
            raise DimensionMismatchError(f"{name} differs: {getattr(a, name)} vs {getattr(b, name)}")
    if a.complete != b.complete or (not a.complete and set(a.coeffs) != set(b.coeffs)):
        raise DimensionMismatchError("expansions carry different index sets")
    keys = list(a.coeffs)
    if a.complete:
        keys = sorted(set(a.coeffs) | set(b.coeffs), key=FourierIndex.sort_key)
    coeffs = {index: a.coefficient(index) - b.coefficient(index) for index in keys}
    return Expansion(a.genus, a.weight, a.trace_bound, coeffs, f"{a.label}-{b.label}", a.complete)


def _checksum(lines: Sequence[str]) -> str:
    return hashlib.sha256(("\n".join(lines) + "\n").encode("utf-8")).hexdigest()


def format_expansion(a: Expansion) -> str:
    """
    Plain-text form: header, one '<upper triangle>: <coefficient>' line per
    index in graded order, then the checksum line
    """
    lines = [
        f"{HEADER_PREFIX} genus={a.genus} weight={a.weight.numerator}/{a.weight.denominator} "
        f"trace_bound={a.trace_bound} form={a.label}"
    ]
    lines += [f"{format_upper_triangle(index.t)}: {value}" for index, value in a.coeffs.items()]
    lines.append(CHECKSUM_PREFIX + _checksum(lines))
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> Tuple[int, Fraction, int, str]:
    tokens = line.split(" ")
    if len(tokens) != 5 or tokens[0] != HEADER_PREFIX:
        raise CacheFormatError(f"unknown header {line!r}")
    fields: Dict[str, str] = {}
    for token, expected in zip(tokens[1:], ("genus", "weight", "trace_bound", "form")):
        name, sep, value = token.partition("=")
        if name != expected or not sep:
            raise CacheFormatError(f"header field {token!r}, expected {expected}=")
        fields[name] = value
    try:
        numerator, denominator = fields["weight"].split("/")
        return int(fields["genus"]), Fraction(int(numerator), int(denominator)), int(fields["trace_bound"]), fields["form"]
    except ValueError as exc:
        raise CacheFormatError(f"malformed header {line!r}: {exc}") from None


def parse_expansion(text: str, require_checksum: bool = True) -> Expansion:
    """
    Read the text written by format_expansion

    Args:
        text: File contents
        require_checksum: Reject text without a matching checksum line

    Returns:
        Complete Expansion
    """
    lines = text.splitlines()
    if not lines:
        raise CacheFormatError("empty expansion text")
    if lines[-1].startswith(CHECKSUM_PREFIX):
        if lines[-1][len(CHECKSUM_PREFIX):] != _checksum(lines[:-1]):
            raise CacheFormatError("checksum mismatch")
        lines = lines[:-1]
    elif require_checksum:
        raise CacheFormatError("missing checksum line")
    genus, weight, bound, label = _parse_header(lines[0])
    coeffs: Dict[FourierIndex, int] = {}
    previous = None
    for line in lines[1:]:
        entries, sep, value = line.partition(":")
        if not sep:
            raise CacheFormatError(f"malformed coefficient line {line!r}")
        try:
            index = FourierIndex.from_upper_triangle(genus, [int(tok) for tok in entries.split()])
            coeffs[index] = int(value)
        except (ValueError, InvalidIndexError) as exc:
            raise CacheFormatError(f"bad coefficient line {line!r}: {exc}") from None
        if previous is not None and index.sort_key() <= previous:
            raise CacheFormatError(f"line {line!r} breaks graded order")
        previous = index.sort_key()
    try:
        return Expansion(genus, weight, bound, coeffs, label)
    except (InvalidIndexError, DimensionMismatchError) as exc:
        raise CacheFormatError(str(exc)) from None
