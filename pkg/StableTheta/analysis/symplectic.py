"""
StableTheta Symplectic Operators
Action of Sp(2n, ℝ) on the Siegel upper half plane, the automorphy factor
det(CZ+D)^k, and the operators P, Q and L relating expansions to functions
on the group
"""

import functools
import logging
from dataclasses import dataclass
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, InvalidFormError, SingularActionError
from ..forms.fourier import Expansion, stratum_size
from ..forms.siegel import siegel_phi_iterated
from ..tools.matrix_validator import MatrixValidator
from .limits import ConvergenceReport, assess_schedule

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12
SYMPLECTIC_TOLERANCE = 1e-10
ACTION_TOLERANCE = 1e-10
SECTION_TOLERANCE = 1e-8
CONDITIONING_LIMIT = 1e12

GroupFunction = Callable[["SymplecticElement"], complex]


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


@dataclass(frozen=True, eq=False)
class SiegelPoint:
    """Z = X + iY with X symmetric and Y symmetric positive definite"""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=np.float64))
        y = np.atleast_2d(np.asarray(self.y, dtype=np.float64))
        n = y.shape[0]
        for name, part in (("X", x), ("Y", y)):
            tolerance = SYMMETRY_TOLERANCE * max(1.0, float(np.max(np.abs(part))) if part.size else 1.0)
            ok, message = MatrixValidator.validate_real_symmetric(part, n, tolerance)
            if not ok:
                raise DimensionMismatchError(f"{name}: {message}")
        ok, message = MatrixValidator.validate_positive_definite(y)
        if not ok:
            raise DimensionMismatchError(f"Y: {message}")
        object.__setattr__(self, "x", _symmetrize(x))
        object.__setattr__(self, "y", _symmetrize(y))

    @classmethod
    def from_complex(cls, z: np.ndarray) -> "SiegelPoint":
        z = np.atleast_2d(np.asarray(z, dtype=np.complex128))
        return cls(z.real, z.imag)

    @classmethod
    def scalar(cls, n: int, t: float = 1.0) -> "SiegelPoint":
        """tiI_n; the base point iI_n for t = 1"""
        return cls(np.zeros((n, n)), t * np.eye(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, y_min: float = 1.0, spread: float = 0.3) -> "SiegelPoint":
        """Random point with smallest eigenvalue of Y at least y_min"""
        x = _symmetrize(rng.normal(scale=spread, size=(n, n)))
        a = rng.normal(scale=spread, size=(n, n))
        return cls(x, y_min * np.eye(n) + a @ a.T)

    @property
    def genus(self) -> int:
        return self.y.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.x + 1j * self.y

    def min_imaginary_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.y)[0]) if self.genus else float("inf")


@dataclass(frozen=True, eq=False)
class SymplecticElement:
    """g = (A B; C D) with ᵗgJg = J"""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        blocks = [np.atleast_2d(np.asarray(m, dtype=np.float64)) for m in (self.a, self.b, self.c, self.d)]
        n = blocks[0].shape[0]
        if any(m.shape != (n, n) for m in blocks):
            raise DimensionMismatchError(f"blocks must all be {n}×{n}")
        for name, m in zip("abcd", blocks):
            object.__setattr__(self, name, m)
        g = self.to_matrix()
        j = _standard_form(n)
        deviation = float(np.max(np.abs(g.T @ j @ g - j))) if n else 0.0
        if deviation > SYMPLECTIC_TOLERANCE * max(1.0, float(np.max(np.abs(g))) ** 2):
            raise InvalidFormError(f"matrix is not symplectic (ᵗgJg − J up to {deviation:.3e})")

    @property
    def genus(self) -> int:
        return self.a.shape[0]

    def to_matrix(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.c, self.d]])

    @classmethod
    def from_matrix(cls, g: np.ndarray) -> "SymplecticElement":
        n = g.shape[0] // 2
        return cls(g[:n, :n], g[:n, n:], g[n:, :n], g[n:, n:])

    def __matmul__(self, other: "SymplecticElement") -> "SymplecticElement":
        if other.genus != self.genus:
            raise DimensionMismatchError(f"genus {self.genus} times genus {other.genus}")
        return SymplecticElement.from_matrix(self.to_matrix() @ other.to_matrix())

    def inverse(self) -> "SymplecticElement":
        return SymplecticElement(self.d.T, -self.b.T, -self.c.T, self.a.T)

    @classmethod
    def identity(cls, n: int) -> "SymplecticElement":
        return cls(np.eye(n), np.zeros((n, n)), np.zeros((n, n)), np.eye(n))

    @classmethod
    def standard_j(cls, n: int) -> "SymplecticElement":
        """(0 I; −I 0), acting by Z ↦ −Z⁻¹"""
        return cls(np.zeros((n, n)), np.eye(n), -np.eye(n), np.zeros((n, n)))

    @classmethod
    def translation(cls, s: np.ndarray) -> "SymplecticElement":
        """(I S; 0 I) for symmetric S, acting by Z ↦ Z + S"""
        s = np.atleast_2d(np.asarray(s, dtype=np.float64))
        n = s.shape[0]
        return cls(np.eye(n), s, np.zeros((n, n)), np.eye(n))

    @classmethod
    def rotation(cls, a: np.ndarray) -> "SymplecticElement":
        """(A 0; 0 ᵗA⁻¹), acting by Z ↦ AZᵗA"""
        a = np.atleast_2d(np.asarray(a, dtype=np.float64))
        n = a.shape[0]
        return cls(a, np.zeros((n, n)), np.zeros((n, n)), np.linalg.inv(a).T)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "SymplecticElement":
        """(A −B; B A) for U = A + iB unitary; fixes iI and J(k, iI) = det U"""
        u = np.atleast_2d(np.asarray(u, dtype=np.complex128))
        return cls(u.real, -u.imag, u.imag, u.real)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, steps: int = 2, spread: float = 0.3) -> "SymplecticElement":
        """Product of random translations, rotations and occasional J factors"""
        g = cls.identity(n)
        for _ in range(steps):
            s = _symmetrize(rng.normal(scale=spread, size=(n, n)))
            a = np.eye(n) + spread * rng.normal(size=(n, n))
            g = g @ cls.translation(s) @ cls.rotation(a)
            if rng.random() < 0.5:
                g = g @ cls.standard_j(n)
        return g


def _standard_form(n: int) -> np.ndarray:
    return np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])


@dataclass(frozen=True)
class ScalarWeight:
    """ρ = det^k"""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"weight must be nonnegative, got {self.k}")


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary matrix via QR of a complex Gaussian"""
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def _cz_plus_d(g: SymplecticElement, z: SiegelPoint, conditioning_limit: float) -> np.ndarray:
    if g.genus != z.genus:
        raise DimensionMismatchError(f"element of genus {g.genus} acting on a genus-{z.genus} point")
    m = g.c @ z.z + g.d
    condition = float(np.linalg.cond(m)) if g.genus else 1.0
    if not np.isfinite(condition) or condition > conditioning_limit:
        raise SingularActionError(condition, conditioning_limit)
    return m


def act(g: SymplecticElement, z: SiegelPoint, conditioning_limit: float = CONDITIONING_LIMIT) -> SiegelPoint:
    """
    g·Z = (AZ + B)(CZ + D)⁻¹, symmetrized

    Args:
        g: Symplectic element
        z: Point of the same genus
        conditioning_limit: Largest accepted condition number of CZ + D

    Returns:
        The image point
    """
    m = _cz_plus_d(g, z, conditioning_limit)
    numerator = g.a @ z.z + g.b
    w = np.linalg.solve(m.T, numerator.T).T
    return SiegelPoint.from_complex(_symmetrize(w))


def automorphy_factor(g: SymplecticElement, z: SiegelPoint, w: ScalarWeight,
                      conditioning_limit: float = CONDITIONING_LIMIT) -> complex:
    """J(g, Z) = det(CZ + D)^k"""
    m = _cz_plus_d(g, z, conditioning_limit)
    return complex(np.linalg.det(m)) ** w.k if w.k else 1.0 + 0.0j


@dataclass(frozen=True)
class EvaluationResult:
    value: complex
    tail_estimate: float
    flagged: bool


def eval_expansion(a: Expansion, z: SiegelPoint, y0: Optional[float] = None,
                   tolerance: float = 1e-9) -> EvaluationResult:
    """
    Σ a(T)·e^{πi tr(TZ)} over the stored indices

    The tail estimate multiplies the size of the next trace stratum, the
    largest stored coefficient and e^{−π·y0·(B+2)}.

    Args:
        a: Expansion
        z: Point of the expansion's genus
        y0: Lower bound for Y (defaults to its smallest eigenvalue)
        tolerance: Tail level above which the result is flagged

    Returns:
        EvaluationResult
    """
    if z.genus != a.genus:
        raise DimensionMismatchError(f"genus-{a.genus} expansion evaluated at a genus-{z.genus} point")
    if a.genus == 0:
        return EvaluationResult(complex(sum(a.coeffs.values())), 0.0, False)
    indices = [index for index, value in a.coeffs.items() if value]
    value = 0j
    if indices:
        stack = np.array([index.t for index in indices], dtype=np.float64)
        coefficients = np.array([float(a.coeffs[index]) for index in indices])
        exponents = np.einsum("kij,ij->k", stack, z.z)
        value = complex(np.sum(coefficients * np.exp(1j * np.pi * exponents)))
    y0 = z.min_imaginary_eigenvalue() if y0 is None else y0
    if y0 <= 0:
        raise DimensionMismatchError(f"y0 must be positive, got {y0}")
    bound = a.trace_bound + 2
    tail = stratum_size(a.genus, bound) * a.max_abs_coefficient() * float(np.exp(-np.pi * y0 * bound))
    flagged = tail > tolerance
    if flagged:
        logger.debug("truncation tail %.3e exceeds %.1e at y0 = %.3g", tail, tolerance, y0)
    return EvaluationResult(value, tail, flagged)


def _check_weight(f: Expansion, w: ScalarWeight) -> None:
    if f.weight != w.k:
        raise DimensionMismatchError(f"expansion of weight {f.weight} lifted with det^{w.k}")


def lift_q(f: Expansion, g: SymplecticElement, w: ScalarWeight,
           conditioning_limit: float = CONDITIONING_LIMIT) -> complex:
    """
    (Qf)(g) = J(g, iI)⁻¹·f(g·iI)

    Args:
        f: Expansion of weight w.k
        g: Element of the expansion's genus
        w: Scalar weight

    Returns:
        The value on the group
    """
    _check_weight(f, w)
    base = SiegelPoint.scalar(g.genus)
    value = eval_expansion(f, act(g, base, conditioning_limit)).value
    return value / automorphy_factor(g, base, w, conditioning_limit)


def lift_handle(f: Expansion, w: ScalarWeight) -> GroupFunction:
    """g ↦ lift_q(f, g, w)"""
    _check_weight(f, w)
    return functools.partial(lift_q, f, w=w)


def _sqrt_pair(y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(y)
    root = np.sqrt(values)
    return (vectors * root) @ vectors.T, (vectors / root) @ vectors.T


def siegel_section(z: SiegelPoint) -> SymplecticElement:
    """g(Z) = (Y^{1/2} XY^{−1/2}; 0 Y^{−1/2}), so that g(Z)·iI = Z"""
    root, inverse_root = _sqrt_pair(z.y)
    n = z.genus
    return SymplecticElement(root, z.x @ inverse_root, np.zeros((n, n)), inverse_root)


def descend_p(F: GroupFunction, z: SiegelPoint, w: ScalarWeight, section: Optional[SymplecticElement] = None,
              conditioning_limit: float = CONDITIONING_LIMIT) -> complex:
    """
    (PF)(Z) = J(g, iI)·F(g) for any g with g·iI = Z

    Args:
        F: Function on the group
        z: Point
        w: Scalar weight
        section: Element over z; defaults to siegel_section(z)

    Returns:
        The value at z
    """
    base = SiegelPoint.scalar(z.genus)
    if section is None:
        section = siegel_section(z)
    else:
        image = act(section, base, conditioning_limit)
        gap = float(np.max(np.abs(image.z - z.z)))
        if gap > SECTION_TOLERANCE * max(1.0, float(np.max(np.abs(z.z)))):
            raise DimensionMismatchError(f"section does not lie over the point (gap {gap:.3e})")
    return automorphy_factor(section, base, w, conditioning_limit) * F(section)


def boundary_family(g: SymplecticElement, n: int, t: float) -> SymplecticElement:
    """
    g_t in genus n: blocks diag(A, t^{1/2}I), diag(B, 0), diag(C, 0), diag(D, t^{−1/2}I)

    g_t·iI_n = diag(g·iI_m, itI_{n−m}).
    """
    m = g.genus
    extra = n - m
    if extra <= 0:
        raise DimensionMismatchError(f"target genus {n} must exceed {m}")
    zero = np.zeros((extra, extra))
    return SymplecticElement(
        _block_diag(g.a, np.sqrt(t) * np.eye(extra)),
        _block_diag(g.b, zero),
        _block_diag(g.c, zero),
        _block_diag(g.d, np.eye(extra) / np.sqrt(t)),
    )


def _block_diag(upper: np.ndarray, lower: np.ndarray) -> np.ndarray:
    k, l = upper.shape[0], lower.shape[0]
    return np.block([[upper, np.zeros((k, l))], [np.zeros((l, k)), lower]])


@dataclass(frozen=True)
class LimitResult:
    value: complex
    report: ConvergenceReport


def siegel_l(F: GroupFunction, g: SymplecticElement, n: int, t_schedule: Sequence[float], w: ScalarWeight,
             tolerance: float = 1e-6, conditioning_limit: float = CONDITIONING_LIMIT) -> LimitResult:
    """
    (L F)(g) = lim J_m(g, iI)⁻¹·J_n(g_t, iI)·F(g_t), evaluated along t_schedule

    Args:
        F: Function on the genus-n group
        g: Element of genus m < n
        n: Genus of F
        t_schedule: Increasing positive values of t
        w: Scalar weight

    Returns:
        LimitResult with the value at the last t and the convergence report
    """
    if g.genus >= n:
        raise DimensionMismatchError(f"L needs genus {g.genus} < {n}")
    base_m = SiegelPoint.scalar(g.genus)
    base_n = SiegelPoint.scalar(n)
    j_m = automorphy_factor(g, base_m, w, conditioning_limit)
    values = []
    for t in t_schedule:
        gt = boundary_family(g, n, t)
        values.append(automorphy_factor(gt, base_n, w, conditioning_limit) * F(gt) / j_m)
    report = assess_schedule(t_schedule, values, tolerance)
    return LimitResult(report.value, report)


def embed_point(z: SiegelPoint, l: int) -> SiegelPoint:
    """Z ↦ diag(Z, iI_{l−k})"""
    k = z.genus
    if l <= k:
        raise DimensionMismatchError(f"target genus {l} must exceed {k}")
    return SiegelPoint(_block_diag(z.x, np.zeros((l - k, l - k))), _block_diag(z.y, np.eye(l - k)))


def embed_group(g: SymplecticElement, l: int) -> SymplecticElement:
    """(A B; C D) ↦ (diag(A, I) diag(B, 0); diag(C, 0) diag(D, I))"""
    k = g.genus
    if l <= k:
        raise DimensionMismatchError(f"target genus {l} must exceed {k}")
    extra = l - k
    zero = np.zeros((extra, extra))
    return SymplecticElement(_block_diag(g.a, np.eye(extra)), _block_diag(g.b, zero),
                             _block_diag(g.c, zero), _block_diag(g.d, np.eye(extra)))


@dataclass(frozen=True)
class BoundednessReport:
    t_values: Tuple[float, ...]
    magnitudes: Tuple[float, ...]
    bound: float

    @property
    def supremum(self) -> float:
        return max(self.magnitudes, default=0.0)

    @property
    def bounded(self) -> bool:
        return all(np.isfinite(self.magnitudes)) and self.supremum <= self.bound


def sp3_boundedness(f: Expansion, w: ScalarWeight, t_values: Sequence[float],
                    bound: float = 1e6) -> BoundednessReport:
    """
    |det(Y^{−1/2})^k·(Qf)(g(Z))| along the ray Z = itI

    Args:
        f: Expansion
        w: Scalar weight
        t_values: Points of the ray (t ≥ 1)
        bound: Level the magnitudes must stay under

    Returns:
        BoundednessReport
    """
    magnitudes = []
    for t in t_values:
        z = SiegelPoint.scalar(f.genus, t)
        rho = float(t) ** (-f.genus * w.k / 2)
        magnitudes.append(abs(rho * lift_q(f, siegel_section(z), w)))
    return BoundednessReport(tuple(float(t) for t in t_values), tuple(magnitudes), bound)


@dataclass(frozen=True)
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tolerance


@dataclass(frozen=True)
class OperatorSuiteReport:
    checks: Tuple[CheckResult, ...]
    convergence: Tuple[ConvergenceReport, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def warnings(self) -> List[str]:
        return sorted({report.warning for report in self.convergence if report.warning})


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _matrix_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(b))))


def _unit_circle_point(rng: np.random.Generator, genus: int = 1) -> SiegelPoint:
    """Point near iI whose image under J stays at the same height"""
    angle = np.pi / 2 + rng.uniform(-0.2, 0.2)
    x = np.cos(angle) * np.eye(genus)
    if genus > 1:
        x = x + _symmetrize(rng.uniform(-0.05, 0.05, size=(genus, genus)) * (1 - np.eye(genus)))
    return SiegelPoint(x, np.sin(angle) * np.eye(genus))


def _integral_symmetric(genus: int, rng: np.random.Generator) -> np.ndarray:
    s = rng.integers(-2, 3, size=(genus, genus))
    return (np.triu(s) + np.triu(s, 1).T).astype(float)


def _signed_permutation(genus: int, rng: np.random.Generator) -> np.ndarray:
    u = np.zeros((genus, genus))
    u[np.arange(genus), rng.permutation(genus)] = rng.choice((-1.0, 1.0), size=genus)
    return u


def _elementary_unimodular(genus: int, rng: np.random.Generator) -> np.ndarray:
    i, j = rng.choice(genus, size=2, replace=False)
    u = np.eye(genus)
    u[i, j] = rng.choice((-1.0, 1.0))
    return u


def _modular_gap(f: Expansion, g: SymplecticElement, z: SiegelPoint, w: ScalarWeight, limit: float,
                 tail_tolerance: float, skip_above: Optional[float] = None) -> Optional[float]:
    """|f(g·Z) − J(g, Z)·f(Z)| relative, or None when a truncation tail exceeds skip_above"""
    lhs = eval_expansion(f, act(g, z, limit), tolerance=tail_tolerance)
    rhs = eval_expansion(f, z, tolerance=tail_tolerance)
    if skip_above is not None and max(lhs.tail_estimate, rhs.tail_estimate) > skip_above:
        return None
    return _relative(lhs.value, automorphy_factor(g, z, w, limit) * rhs.value)


def run_operator_suite(expansions: Mapping[int, Expansion], w: ScalarWeight, t_schedule: Sequence[float],
                       tolerances: Mapping[str, float], seed: int, cocycle_samples: int = 100,
                       point_samples: int = 20, limit_samples: int = 3) -> OperatorSuiteReport:
    """
    Numeric checks of the operator identities on the given expansions

    Args:
        expansions: Expansions of one form keyed by genus (consecutive genera)
        w: Scalar weight of the expansions
        t_schedule: Schedule for L
        tolerances: operator_tolerance, cocycle_tolerance, eval_tail_tolerance, conditioning_limit
        seed: Random seed
        cocycle_samples: Random pairs for the action and cocycle checks
        point_samples: Points for the round trip and equivariance checks
        limit_samples: Elements per genus pair for the L identities

    Returns:
        OperatorSuiteReport
    """
    rng = np.random.default_rng(seed)
    operator_tol = float(tolerances.get("operator_tolerance", 1e-6))
    cocycle_tol = float(tolerances.get("cocycle_tolerance", 1e-9))
    limit = float(tolerances.get("conditioning_limit", CONDITIONING_LIMIT))
    tail_tol = float(tolerances.get("eval_tail_tolerance", 1e-9))
    genera = sorted(g for g in expansions if g >= 1)
    checks: List[CheckResult] = []
    reports: List[ConvergenceReport] = []

    action_gap, cocycle_gap = 0.0, 0.0
    for _ in range(cocycle_samples):
        g1, g2 = SymplecticElement.random(2, rng), SymplecticElement.random(2, rng)
        z = SiegelPoint.random(2, rng)
        inner = act(g2, z, limit)
        action_gap = max(action_gap, _matrix_gap(act(g1 @ g2, z, limit).z, act(g1, inner, limit).z))
        product = automorphy_factor(g1, inner, w, limit) * automorphy_factor(g2, z, w, limit)
        cocycle_gap = max(cocycle_gap, abs(automorphy_factor(g1 @ g2, z, w, limit) - product) / max(1.0, abs(product)))
    checks.append(CheckResult("action composition", action_gap, ACTION_TOLERANCE, cocycle_samples))
    checks.append(CheckResult("cocycle", cocycle_gap, cocycle_tol, cocycle_samples))

    round_trip, section_gap, k_gap = 0.0, 0.0, 0.0
    modular = {"translations": [0.0, 0], "signed permutations": [0.0, 0], "unimodular shears": [0.0, 0],
               "J": [0.0, 0]}
    skipped = {"unimodular shears": 0, "J": 0}

    def record(kind: str, gap: Optional[float]) -> None:
        if gap is None:
            skipped[kind] += 1
            return
        modular[kind][0] = max(modular[kind][0], gap)
        modular[kind][1] += 1

    for genus in genera:
        f = expansions[genus]
        handle = lift_handle(f, w)
        for _ in range(point_samples):
            z = SiegelPoint.random(genus, rng)
            direct = eval_expansion(f, z, tolerance=tail_tol).value
            round_trip = max(round_trip, _relative(descend_p(handle, z, w, conditioning_limit=limit), direct))
            k = SymplecticElement.from_unitary(random_unitary(genus, rng))
            section = siegel_section(z) @ k
            section_gap = max(section_gap, _relative(descend_p(handle, z, w, section, limit), direct))
            g = SymplecticElement.random(genus, rng)
            k_factor = automorphy_factor(k, SiegelPoint.scalar(genus), w, limit)
            k_gap = max(k_gap, _relative(handle(g @ k) * k_factor, handle(g)))
            # translations and signed permutations keep every trace, so the truncated sums match exactly
            translation = SymplecticElement.translation(_integral_symmetric(genus, rng))
            record("translations", _modular_gap(f, translation, z, w, limit, tail_tol))
            rotation = SymplecticElement.rotation(_signed_permutation(genus, rng))
            record("signed permutations", _modular_gap(f, rotation, z, w, limit, tail_tol))
            if genus >= 2:
                shear = SymplecticElement.rotation(_elementary_unimodular(genus, rng))
                high = SiegelPoint.random(genus, rng, y_min=2.0)
                record("unimodular shears", _modular_gap(f, shear, high, w, limit, tail_tol, operator_tol))
            # J moves one of Z, JZ to height ≤ 1, so only a small truncation tail is comparable
            j = SymplecticElement.standard_j(genus)
            record("J", _modular_gap(f, j, _unit_circle_point(rng, genus), w, limit, tail_tol, operator_tol))
    samples = point_samples * len(genera)
    checks.append(CheckResult("descend-lift round trip", round_trip, cocycle_tol, samples))
    checks.append(CheckResult("section independence", section_gap, cocycle_tol, samples))
    checks.append(CheckResult("right K-equivariance", k_gap, cocycle_tol, samples))
    for kind, (gap, count) in modular.items():
        checks.append(CheckResult(f"modularity: {kind}", gap, operator_tol, count))
    for kind, count in skipped.items():
        if count:
            logger.warning("modularity under %s: %d points skipped, truncation tail above %.1e",
                           kind, count, operator_tol)

    lq_gap, pl_gap, pairs = 0.0, 0.0, 0
    for m in genera:
        n = m + 1
        if n not in expansions:
            continue
        pairs += 1
        upper = lift_handle(expansions[n], w)
        lower = expansions[m]
        phi_lower = siegel_phi_iterated(expansions[n], m)
        for _ in range(limit_samples):
            g = SymplecticElement.random(m, rng)
            result = siegel_l(upper, g, n, t_schedule, w, operator_tol, limit)
            reports.append(result.report)
            lq_gap = max(lq_gap, _relative(result.value, lift_q(lower, g, w, limit)))
            z = SiegelPoint.random(m, rng)
            l_handle = _limit_handle(upper, n, t_schedule, w, operator_tol, limit, reports)
            pl_gap = max(pl_gap, _relative(descend_p(l_handle, z, w, conditioning_limit=limit),
                                           eval_expansion(phi_lower, z).value))
    if pairs:
        checks.append(CheckResult("L∘Q = Q∘Φ", lq_gap, operator_tol, pairs * limit_samples))
        checks.append(CheckResult("P∘L = Φ∘P", pl_gap, operator_tol, pairs * limit_samples))

    embed_gap, homomorphism_gap = 0.0, 0.0
    for _ in range(point_samples):
        gamma, other = SymplecticElement.random(1, rng), SymplecticElement.random(1, rng)
        z = SiegelPoint.random(1, rng)
        for l in (2, 3):
            lhs = embed_point(act(gamma, z, limit), l).z
            rhs = act(embed_group(gamma, l), embed_point(z, l), limit).z
            embed_gap = max(embed_gap, _matrix_gap(lhs, rhs))
            homomorphism_gap = max(homomorphism_gap, _matrix_gap(
                embed_group(gamma @ other, l).to_matrix(),
                (embed_group(gamma, l) @ embed_group(other, l)).to_matrix()))
    checks.append(CheckResult("embedding equivariance", embed_gap, ACTION_TOLERANCE, point_samples))
    checks.append(CheckResult("embedding homomorphism", homomorphism_gap, ACTION_TOLERANCE, point_samples))

    for check in checks:
        logger.info("operator check %s: deviation %.3e (tolerance %.1e)", check.name, check.deviation, check.tolerance)
    return OperatorSuiteReport(tuple(checks), tuple(reports))


def _limit_handle(F: GroupFunction, n: int, t_schedule: Sequence[float], w: ScalarWeight, tolerance: float,
                  limit: float, reports: List[ConvergenceReport]) -> GroupFunction:
    def evaluate(g: SymplecticElement) -> complex:
        result = siegel_l(F, g, n, t_schedule, w, tolerance, limit)
        reports.append(result.report)
        return result.value

    return evaluate
