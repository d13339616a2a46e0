"""
StableTheta Siegel Operator
The Siegel operator on expansions, stable families of theta series, the
Igusa difference form and the genus-4 Schottky search
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..exceptions import CoherenceError, DimensionMismatchError, InvalidIndexError
from ..lattice.enumeration import NodeBudget
from ..lattice.qforms import QuadraticForm, make_d16_plus, make_e8_e8
from ..utils.workers import parallel_map
from .fourier import (
    Expansion,
    FourierIndex,
    canonical_index,
    enumerate_indices,
    expansion_sub,
    is_singular,
    representation_count,
    theta_expansion,
)

logger = logging.getLogger(__name__)

IGUSA_WEIGHT = Fraction(8)
SCHOTTKY_TRACE = 8


def siegel_phi(a: Expansion) -> Expansion:
    """
    Φ: genus n → genus n−1, a′(T′) = a(T′ ⊕ 0)

    Only indices whose last row and column vanish survive the boundary limit.

    Args:
        a: Expansion of genus ≥ 1

    Returns:
        Expansion of genus n−1 with the same weight and bound
    """
    if a.genus < 1:
        raise DimensionMismatchError("the Siegel operator needs genus ≥ 1")
    keep = list(range(a.genus - 1))
    coeffs = {index.principal(keep): value for index, value in a.coeffs.items() if index.last_border_is_zero()}
    return Expansion(a.genus - 1, a.weight, a.trace_bound, coeffs, a.label, a.complete)


def siegel_phi_iterated(a: Expansion, m: int) -> Expansion:
    """Φ_{m,n} as the composition of adjacent operators"""
    if not 0 <= m <= a.genus:
        raise DimensionMismatchError(f"target genus {m} outside 0..{a.genus}")
    while a.genus > m:
        a = siegel_phi(a)
    return a


@dataclass(frozen=True)
class PairFailure:
    index: FourierIndex
    expected: int
    actual: int


@dataclass(frozen=True)
class PairReport:
    """Coherence of Φ(members[upper]) with members[lower]"""

    lower_genus: int
    upper_genus: int
    failures: Tuple[PairFailure, ...] = ()

    @property
    def coherent(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class StabilityReport:
    pairs: Tuple[PairReport, ...] = ()

    @property
    def stable(self) -> bool:
        return all(pair.coherent for pair in self.pairs)

    def failure_count(self) -> int:
        return sum(len(pair.failures) for pair in self.pairs)


def check_stability(family: Sequence[Expansion]) -> StabilityReport:
    """
    Compare Φ(f_n) with f_{n−1} for every adjacent pair

    Args:
        family: Expansions of consecutive genera, equal weight and bound

    Returns:
        StabilityReport; stable iff every failure set is empty
    """
    for lower, upper in zip(family, family[1:]):
        if upper.genus != lower.genus + 1:
            raise DimensionMismatchError(f"genera {lower.genus} and {upper.genus} are not consecutive")
        if upper.weight != lower.weight or upper.trace_bound != lower.trace_bound:
            raise DimensionMismatchError("family members differ in weight or trace bound")
    pairs = []
    for lower, upper in zip(family, family[1:]):
        projected = siegel_phi(upper)
        failures = []
        for index in sorted(set(projected.coeffs) | set(lower.coeffs), key=FourierIndex.sort_key):
            try:
                expected, actual = lower.coefficient(index), projected.coefficient(index)
            except InvalidIndexError:
                continue
            if expected != actual:
                failures.append(PairFailure(index, expected, actual))
        if failures:
            logger.info("Φ coherence fails between genus %d and %d at %d indices", lower.genus, upper.genus, len(failures))
        pairs.append(PairReport(lower.genus, upper.genus, tuple(failures)))
    return StabilityReport(tuple(pairs))


@dataclass(frozen=True)
class StableFamily:
    """Expansions of genus 0..max_genus linked by Φ; coherence is checked on construction"""

    max_genus: int
    weight: Fraction
    trace_bound: int
    members: Tuple[Expansion, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.members) != self.max_genus + 1:
            raise DimensionMismatchError(f"expected {self.max_genus + 1} members, got {len(self.members)}")
        for genus, member in enumerate(self.members):
            if member.genus != genus:
                raise DimensionMismatchError(f"member {genus} has genus {member.genus}")
            if member.weight != self.weight or member.trace_bound != self.trace_bound:
                raise DimensionMismatchError(f"member {genus} differs in weight or trace bound")
        report = check_stability(self.members)
        if not report.stable:
            raise CoherenceError(f"family {self.label} is not Φ-coherent ({report.failure_count()} failures)")

    def member(self, genus: int) -> Expansion:
        return self.members[genus]


def theta_stable_family(q: QuadraticForm, max_genus: int, bound: int, budget: Optional[NodeBudget] = None,
                        allow_full_genus4: bool = False, canonicalize: bool = True,
                        workers: int = 1) -> StableFamily:
    """
    (θ_{Q,n}) for n = 0..max_genus at one trace bound

    Args:
        q: Even unimodular form
        max_genus: Largest genus
        bound: Trace bound
        budget: Node budget shared by all members

    Returns:
        StableFamily of weight rank/2
    """
    budget = budget or NodeBudget()
    memo: Dict = {}
    members = tuple(
        theta_expansion(q, n, bound, budget=budget, allow_full_genus4=allow_full_genus4,
                        canonicalize=canonicalize, workers=workers, memo=memo)
        for n in range(max_genus + 1)
    )
    return StableFamily(max_genus, Fraction(q.dim, 2), bound, members, q.label)


def igusa_form(n: int, bound: int, indices: Optional[Sequence[FourierIndex]] = None,
               budget: Optional[NodeBudget] = None, allow_full_genus4: bool = False,
               canonicalize: bool = True, workers: int = 1) -> Expansion:
    """
    θ_{E8⊕E8,n} − θ_{D16+,n}, a weight-8 form

    Args:
        n: Genus
        bound: Trace bound
        indices: Optional subset of indices (restricted result)

    Returns:
        Expansion labelled IGUSA
    """
    budget = budget or NodeBudget()
    options = dict(indices=indices, budget=budget, allow_full_genus4=allow_full_genus4,
                   canonicalize=canonicalize, workers=workers)
    difference = expansion_sub(theta_expansion(make_e8_e8(), n, bound, **options),
                               theta_expansion(make_d16_plus(), n, bound, **options))
    return Expansion(difference.genus, IGUSA_WEIGHT, difference.trace_bound, difference.coeffs,
                     "IGUSA", difference.complete)


@dataclass(frozen=True)
class CuspReport:
    """Singular indices carrying a nonzero coefficient"""

    checked: int
    violations: Tuple[Tuple[FourierIndex, int], ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


def cusp_surrogate_check(a: Expansion) -> CuspReport:
    """A cusp form has no nonzero coefficient at a singular index"""
    singular = [(index, value) for index, value in a.coeffs.items() if is_singular(index)]
    return CuspReport(len(singular), tuple((index, value) for index, value in singular if value))


def schottky_candidates(bound: int) -> List[FourierIndex]:
    """Genus-4 indices with every diagonal entry 2, in graded order, up to the bound"""
    if bound < SCHOTTKY_TRACE:
        return []
    return [index for index in enumerate_indices(4, SCHOTTKY_TRACE) if index.diagonal == (2, 2, 2, 2)]


def _difference_task(args: Tuple[FourierIndex, int]) -> Tuple[int, int]:
    index, limit = args
    budget = NodeBudget(limit)
    difference = representation_count(make_e8_e8(), index, budget) - representation_count(make_d16_plus(), index, budget)
    return difference, budget.used


def schottky_witness(bound: int, budget: Optional[NodeBudget] = None,
                     workers: int = 1) -> Optional[Tuple[FourierIndex, int]]:
    """
    First diagonal-2 genus-4 index where the Igusa coefficient is nonzero

    Args:
        bound: Trace bound; below 8 there are no candidates
        budget: Node budget
        workers: Processes for the class representatives

    Returns:
        (index, exact difference) or None when every candidate agrees
    """
    budget = budget or NodeBudget()
    representatives: Dict[FourierIndex, FourierIndex] = {}
    for index in schottky_candidates(bound):
        representatives.setdefault(canonical_index(index), index)
    classes = list(representatives.items())
    logger.info("Schottky search: %d classes among diagonal-2 genus-4 indices", len(classes))
    if workers > 1:
        results = parallel_map(_difference_task, [(key, budget.remaining) for key, _ in classes], workers)
        budget.charge(sum(used for _, used in results))
        for (_, index), (difference, _) in zip(classes, results):
            if difference:
                return index, difference
        return None
    for key, index in classes:
        difference = (representation_count(make_e8_e8(), key, budget)
                      - representation_count(make_d16_plus(), key, budget))
        logger.debug("Schottky candidate %s: difference %d", index, difference)
        if difference:
            return index, difference
    return None


@dataclass(frozen=True)
class OperatorRegime:
    """Known behaviour of Φ_{n−1,n} on weight d, from the theory of singular forms"""

    weight: int
    genus: int
    injective: bool
    isomorphism: bool
    maass_isomorphism: bool
    notes: Tuple[str, ...] = ()


def siegel_operator_regime(weight: int, genus: int) -> OperatorRegime:
    """
    Φ_{n−1,n} on weight d is injective for n > 2d, bijective for n > 2d+1,
    and bijective for even d > 2n

    Args:
        weight: d
        genus: n

    Returns:
        OperatorRegime; informational, not a verified claim
    """
    injective = genus > 2 * weight
    isomorphism = genus > 2 * weight + 1
    maass = weight % 2 == 0 and weight > 2 * genus
    notes = () if injective or maass else ("no regime applies; Φ may have a kernel (cusp forms)",)
    return OperatorRegime(weight, genus, injective, isomorphism, maass, notes)
