"""
StableTheta Lattice Enumeration
Fincke-Pohst enumeration of norm shells with exact acceptance, constrained
extensions and shell inner-product histograms
"""

import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import BudgetExceededError, DimensionMismatchError, InvalidIndexError
from ..tools.matrix_validator import MatrixValidator
from ..utils.helpers import IntMatrix
from ..utils.workers import parallel_map
from .qforms import QuadraticForm

logger = logging.getLogger(__name__)

# Slack added to every floating-point bound; acceptance is always exact
BOUND_SLACK = 1e-6
# Max entries of one chunk of an inner-product matrix
CHUNK_ENTRIES = 4_000_000
DEFAULT_BUDGET = 10**9


class NodeBudget:
    """Counts enumeration nodes and raises once the limit is passed"""

    def __init__(self, limit: int = DEFAULT_BUDGET):
        if limit <= 0:
            raise ValueError(f"budget must be positive, got {limit}")
        self.limit = int(limit)
        self.used = 0

    @property
    def remaining(self) -> int:
        return max(self.limit - self.used, 0)

    def charge(self, nodes: int) -> None:
        self.used += nodes
        if self.used > self.limit:
            raise BudgetExceededError(self.used, self.limit)

    def __repr__(self) -> str:
        return f"NodeBudget(used={self.used}, limit={self.limit})"


@dataclass(frozen=True, eq=False)
class NormShell:
    """All lattice vectors of one norm, sorted lexicographically, one per row"""

    label: str
    norm: int
    vectors: np.ndarray

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        for row in self.vectors:
            yield tuple(int(v) for v in row)

    def as_tuples(self) -> List[Tuple[int, ...]]:
        return list(self)

    def positive_half(self) -> np.ndarray:
        """Rows whose first nonzero coordinate is positive (one of each ±v pair)"""
        if self.norm == 0:
            return self.vectors
        return self.vectors[len(self) // 2:]


@dataclass(frozen=True)
class LDLProfile:
    """
    Exact decomposition Q(x) = Σ d_i (x_i + Σ_{j>i} u_ij x_j)²

    d and u are exact Fractions; the float copies only drive the search bounds.
    """

    gram: IntMatrix
    d: Tuple[Fraction, ...]
    u: Tuple[Tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.d)


@lru_cache(maxsize=32)
def _profile_for(gram: IntMatrix) -> LDLProfile:
    r = len(gram)
    q = [[Fraction(v) for v in row] for row in gram]
    for i in range(r):
        if q[i][i] <= 0:
            raise DimensionMismatchError(f"gram is not positive definite (pivot {i} = {q[i][i]})")
        for j in range(i + 1, r):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, r):
            for l in range(k, r):
                q[k][l] -= q[k][i] * q[i][l]
    d = tuple(q[i][i] for i in range(r))
    u = tuple(tuple(q[i][j] if j > i else Fraction(0) for j in range(r)) for i in range(r))
    return LDLProfile(gram, d, u)


def ldl_profile(q: QuadraticForm) -> LDLProfile:
    """
    Exact rational bound profile of a positive definite form

    Args:
        q: Quadratic form

    Returns:
        LDLProfile with d_i > 0
    """
    return _profile_for(q.gram)


class _ShellSearch:
    """
    Depth-first search from the last coordinate down to the first

    Bounds at levels > 0 use floats widened by BOUND_SLACK. Level 0 solves
    q00 x² + 2 L x + (N − m) = 0 over the integers, so the accepted set is
    exactly {x : Q(x) = m}.
    """

    def __init__(self, profile: LDLProfile, m: int, budget: NodeBudget, collect: bool):
        self.r = profile.dim
        self.m = m
        self.budget = budget
        self.collect = collect
        self.gram = profile.gram
        self.d = [float(v) for v in profile.d]
        # column j -> [(k, u_kj)] for k < j, nonzero only
        self.u_cols = [[(k, float(profile.u[k][j])) for k in range(j) if profile.u[k][j]] for j in range(self.r)]
        self.g_cols = [[(k, self.gram[k][j]) for k in range(j) if self.gram[k][j]] for j in range(self.r)]
        self.x = [0] * self.r
        self.center = [0.0] * self.r
        self.linear = [0] * self.r
        self.count = 0
        self.found: List[Tuple[int, ...]] = []

    def run(self, top_values: Optional[Sequence[int]] = None) -> None:
        if self.r == 1:
            self._solve_first(0)
            return
        self._level(self.r - 1, float(self.m), 0, top_values)

    def _assign(self, i: int, value: int, sign: int) -> None:
        step = sign * value
        for k, u in self.u_cols[i]:
            self.center[k] += u * step
        for k, g in self.g_cols[i]:
            self.linear[k] += g * step

    def _level(self, i: int, avail: float, tail: int, values: Optional[Sequence[int]] = None) -> None:
        d = self.d[i]
        c = self.center[i]
        if values is None:
            radius = math.sqrt(max(avail, 0.0) / d) + BOUND_SLACK
            lo = math.ceil(-c - radius)
            hi = math.floor(-c + radius)
            if hi < lo:
                return
            values = range(lo, hi + 1)
        self.budget.charge(len(values))
        g_ii = self.gram[i][i]
        x = self.x
        for v in values:
            rest = avail - d * (v + c) ** 2
            if rest < -BOUND_SLACK:
                continue
            x[i] = v
            new_tail = tail + g_ii * v * v + 2 * v * self.linear[i]
            if v:
                self._assign(i, v, 1)
            if i == 1:
                self._solve_first(new_tail)
            else:
                self._level(i - 1, rest, new_tail)
            if v:
                self._assign(i, v, -1)
        x[i] = 0

    def _solve_first(self, tail: int) -> None:
        q00 = self.gram[0][0]
        lin = self.linear[0]
        disc = lin * lin - q00 * (tail - self.m)
        if disc < 0:
            return
        root = math.isqrt(disc)
        if root * root != disc:
            return
        for numerator in ((-lin - root, -lin + root) if root else (-lin,)):
            if numerator % q00 == 0:
                self.count += 1
                if self.collect:
                    self.x[0] = numerator // q00
                    self.found.append(tuple(self.x))
        self.x[0] = 0


def _top_range(profile: LDLProfile, m: int) -> List[int]:
    last = profile.dim - 1
    radius = math.sqrt(m / float(profile.d[last])) + BOUND_SLACK
    return list(range(math.ceil(-radius), math.floor(radius) + 1))


def _search_task(args: Tuple[IntMatrix, int, int, int, bool]) -> Tuple[int, List[Tuple[int, ...]], int]:
    gram, m, top_value, limit, collect = args
    budget = NodeBudget(limit)
    search = _ShellSearch(_profile_for(gram), m, budget, collect)
    search.run([top_value])
    return search.count, search.found, budget.used


def _check_norm(q: QuadraticForm, m: int) -> None:
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise InvalidIndexError(f"norm must be an integer, got {m!r}")
    if m < 0:
        raise InvalidIndexError(f"norm must be nonnegative, got {m}")
    if m % 2:
        raise InvalidIndexError(f"form {q.label} is even and represents no odd norm (m = {m})")


def _run_search(q: QuadraticForm, m: int, budget: Optional[NodeBudget], collect: bool,
                workers: int) -> Tuple[int, List[Tuple[int, ...]]]:
    budget = budget or NodeBudget()
    profile = ldl_profile(q)
    if workers > 1 and q.dim > 1:
        tasks = [(q.gram, m, v, budget.remaining, collect) for v in _top_range(profile, m)]
        results = parallel_map(_search_task, tasks, workers)
        count = sum(r[0] for r in results)
        found = [v for r in results for v in r[1]]
        budget.charge(sum(r[2] for r in results))
        return count, found
    search = _ShellSearch(profile, m, budget, collect)
    search.run()
    return search.count, search.found


def _lex_sorted(vectors: np.ndarray) -> np.ndarray:
    if vectors.shape[0] <= 1:
        return vectors
    order = np.lexsort(vectors.T[::-1])
    return vectors[order]


class ShellCache:
    """Thread-safe memo of NormShells keyed by (gram, norm) with an LRU vector bound"""

    def __init__(self, max_vectors: int = 5_000_000):
        self.max_vectors = int(max_vectors)
        self._shells: "OrderedDict[Tuple[IntMatrix, int], NormShell]" = OrderedDict()
        self._lock = threading.Lock()
        self._size = 0

    def get(self, gram: IntMatrix, m: int) -> Optional[NormShell]:
        with self._lock:
            shell = self._shells.get((gram, m))
            if shell is not None:
                self._shells.move_to_end((gram, m))
            return shell

    def put(self, gram: IntMatrix, m: int, shell: NormShell) -> None:
        with self._lock:
            key = (gram, m)
            if key in self._shells:
                return
            self._shells[key] = shell
            self._size += len(shell)
            while self._size > self.max_vectors and len(self._shells) > 1:
                _, evicted = self._shells.popitem(last=False)
                self._size -= len(evicted)
                logger.debug("evicted shell %s/%d (%d vectors)", evicted.label, evicted.norm, len(evicted))

    def clear(self) -> None:
        with self._lock:
            self._shells.clear()
            self._size = 0

    def __len__(self) -> int:
        return len(self._shells)


shell_cache = ShellCache()


def vectors_of_norm(q: QuadraticForm, m: int, budget: Optional[NodeBudget] = None,
                    workers: int = 1, use_cache: bool = True) -> NormShell:
    """
    Complete shell {v ∈ ℤ^r : ᵗv·gram·v = m}

    Args:
        q: Positive definite even form
        m: Even nonnegative norm
        budget: Node budget shared with the caller
        workers: Processes for the top-level coordinate split
        use_cache: Consult and fill the module shell cache

    Returns:
        NormShell sorted lexicographically
    """
    _check_norm(q, m)
    if use_cache:
        cached = shell_cache.get(q.gram, m)
        if cached is not None:
            return cached
    _, found = _run_search(q, m, budget, collect=True, workers=workers)
    vectors = np.array(found, dtype=np.int64).reshape(len(found), q.dim)
    shell = NormShell(q.label, m, _lex_sorted(vectors))
    shell.vectors.setflags(write=False)
    logger.debug("shell %s norm %d: %d vectors", q.label, m, len(shell))
    if use_cache:
        shell_cache.put(q.gram, m, shell)
    return shell


def count_by_norm(q: QuadraticForm, m: int, budget: Optional[NodeBudget] = None, workers: int = 1) -> int:
    """
    Number of vectors of norm m, without materializing them

    Args:
        q: Positive definite even form
        m: Even nonnegative norm
        budget: Node budget
        workers: Processes for the top-level coordinate split

    Returns:
        Exact count
    """
    _check_norm(q, m)
    cached = shell_cache.get(q.gram, m)
    if cached is not None:
        return len(cached)
    count, _ = _run_search(q, m, budget, collect=False, workers=workers)
    return count


def constrained_extend(q: QuadraticForm, fixed: Sequence[Sequence[int]], target_norm: int,
                       target_inner: Sequence[int], budget: Optional[NodeBudget] = None,
                       pool: Optional[np.ndarray] = None) -> np.ndarray:
    """
    All x of norm target_norm with ᵗfixed[i]·gram·x = target_inner[i]

    Args:
        q: Quadratic form
        fixed: Previously chosen vectors
        target_norm: Even norm of x
        target_inner: One inner product per fixed vector
        budget: Node budget
        pool: Candidate rows of norm target_norm to filter instead of the whole shell

    Returns:
        Matching vectors, one per row, in the order of the shell (or pool)
    """
    if len(fixed) != len(target_inner):
        raise DimensionMismatchError(f"{len(fixed)} fixed vectors but {len(target_inner)} inner products")
    for vector in fixed:
        ok, message = MatrixValidator.validate_vector(vector, q.dim)
        if not ok:
            raise DimensionMismatchError(message)
    _check_norm(q, target_norm)
    fixed_array = np.array(fixed, dtype=np.int64).reshape(len(fixed), q.dim)
    gram = np.array(q.gram, dtype=np.int64)
    norms = np.einsum("ij,jk,ik->i", fixed_array, gram, fixed_array)
    for norm, inner in zip(norms, target_inner):
        if abs(int(inner)) > math.isqrt(int(norm) * target_norm):
            return np.empty((0, q.dim), dtype=np.int64)
    if pool is None:
        pool = vectors_of_norm(q, target_norm, budget).vectors
    pool = np.asarray(pool, dtype=np.int64).reshape(-1, q.dim)
    if not len(fixed) or not len(pool):
        return pool
    products = (fixed_array @ gram) @ pool.T
    mask = np.all(products == np.asarray(target_inner, dtype=np.int64)[:, None], axis=0)
    return pool[mask]


def naive_vectors_of_norm(q: QuadraticForm, m: int) -> List[Tuple[int, ...]]:
    """
    Box enumeration |x_i| ≤ ⌊√(m·(gram⁻¹)_ii)⌋ with an exact norm test

    Only usable at small rank; serves as the completeness oracle.
    """
    _check_norm(q, m)
    bounds = []
    for value in q.inverse_diagonal():
        scaled = value * m
        bounds.append(math.isqrt(scaled.numerator // scaled.denominator))
    ranges = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, q.dim)
    gram = np.array(q.gram, dtype=np.int64)
    norms = np.einsum("ij,jk,ik->i", grid, gram, grid)
    hits = _lex_sorted(grid[norms == m])
    return [tuple(int(v) for v in row) for row in hits]


_histograms: Dict[Tuple[IntMatrix, int, int], Dict[int, int]] = {}
_histogram_lock = threading.Lock()


def pair_count(left: np.ndarray, right: np.ndarray, gram: np.ndarray, inner: int) -> int:
    """
    Number of pairs (a, b) of rows with ᵗa·gram·b = inner

    Inner products are computed in float64 chunks; integer entries of this
    size are represented exactly.
    """
    if not len(left) or not len(right):
        return 0
    projected = np.asarray(left, dtype=np.float64) @ np.asarray(gram, dtype=np.float64)
    right_t = np.asarray(right, dtype=np.float64).T
    step = max(1, CHUNK_ENTRIES // right.shape[0])
    total = 0
    for start in range(0, projected.shape[0], step):
        total += int(np.count_nonzero(projected[start:start + step] @ right_t == inner))
    return total


def inner_product_histogram(q: QuadraticForm, a: int, b: int,
                            budget: Optional[NodeBudget] = None) -> Dict[int, int]:
    """
    Distribution of ⟨x, y⟩ over x ∈ shell(a), y ∈ shell(b)

    Args:
        q: Quadratic form
        a: Norm of x
        b: Norm of y
        budget: Charged one node per row of shell(a)

    Returns:
        Map inner product -> number of pairs (only nonzero counts)
    """
    key = (q.gram, a, b)
    with _histogram_lock:
        cached = _histograms.get(key)
    if cached is not None:
        return dict(cached)
    left = vectors_of_norm(q, a, budget)
    right = vectors_of_norm(q, b, budget)
    bound = math.isqrt(a * b)
    histogram = np.zeros(2 * bound + 1, dtype=np.int64)
    if len(left) and len(right):
        if budget is not None:
            budget.charge(len(left))
        projected = left.vectors.astype(np.float64) @ np.array(q.gram, dtype=np.float64)
        right_t = right.vectors.astype(np.float64).T
        step = max(1, CHUNK_ENTRIES // len(right))
        for start in range(0, len(left), step):
            block = (projected[start:start + step] @ right_t).astype(np.int64).ravel()
            histogram += np.bincount(block + bound, minlength=2 * bound + 1)
    result = {value - bound: int(n) for value, n in enumerate(histogram) if n}
    with _histogram_lock:
        _histograms[key] = result
    logger.debug("histogram %s (%d, %d): %s", q.label, a, b, result)
    return dict(result)
