from fractions import Fraction

import pytest

from StableTheta.exceptions import CoherenceError, DimensionMismatchError
from StableTheta.forms.fourier import Expansion, FourierIndex, theta_expansion
from StableTheta.forms.siegel import (
    check_stability,
    cusp_surrogate_check,
    igusa_form,
    schottky_candidates,
    schottky_witness,
    siegel_operator_regime,
    siegel_phi,
    siegel_phi_iterated,
    StableFamily,
    theta_stable_family,
)


def test_phi_of_theta_is_lower_theta(e8):
    upper = theta_expansion(e8, 2, 4)
    assert siegel_phi(upper).coeffs == theta_expansion(e8, 1, 4).coeffs
    assert siegel_phi_iterated(upper, 0).coeffs == {FourierIndex.zero(0): 1}
    assert siegel_phi_iterated(upper, 2) is upper


def test_phi_needs_positive_genus(e8):
    with pytest.raises(DimensionMismatchError):
        siegel_phi(theta_expansion(e8, 0, 2))
    with pytest.raises(DimensionMismatchError):
        siegel_phi_iterated(theta_expansion(e8, 1, 2), 2)


def test_theta_family_is_stable(e8):
    family = theta_stable_family(e8, 3, 4)
    assert family.weight == 4
    assert list(family.member(1).coeffs.values()) == [1, 240, 2160]
    report = check_stability(family.members)
    assert report.stable
    assert [(pair.lower_genus, pair.upper_genus) for pair in report.pairs] == [(0, 1), (1, 2), (2, 3)]


def test_double_phi_reaches_genus_one(e8):
    top = theta_expansion(e8, 3, 4)
    assert siegel_phi_iterated(top, 1).coeffs == theta_expansion(e8, 1, 4).coeffs
    assert siegel_phi(siegel_phi(top)).coeffs == siegel_phi_iterated(top, 1).coeffs


@pytest.mark.slow
@pytest.mark.parametrize("form_fixture", ["e8_e8", "d16_plus"])
def test_rank_sixteen_families_are_stable(request, form_fixture):
    q = request.getfixturevalue(form_fixture)
    family = theta_stable_family(q, 3, 6)
    assert family.weight == 8
    report = check_stability(family.members)
    assert report.stable, report.failure_count()
    assert [(pair.lower_genus, pair.upper_genus) for pair in report.pairs] == [(0, 1), (1, 2), (2, 3)]
    assert list(family.member(1).coeffs.values()) == [1, 480, 61920, 1050240]
    assert siegel_phi_iterated(family.member(3), 1).coeffs == family.member(1).coeffs


def test_single_member_is_vacuously_stable(e8):
    report = check_stability([theta_expansion(e8, 0, 4)])
    assert report.stable
    assert report.pairs == ()


def test_fault_is_localized(e8):
    lower, upper = theta_expansion(e8, 1, 4), theta_expansion(e8, 2, 4)
    target = FourierIndex(((4, 0), (0, 0)))
    coeffs = dict(upper.coeffs)
    coeffs[target] += 1
    faulty = Expansion(2, upper.weight, 4, coeffs, "E8")
    report = check_stability([lower, faulty])
    assert not report.stable
    assert report.failure_count() == 1
    failure = report.pairs[0].failures[0]
    assert failure.index == FourierIndex(((4,),))
    assert (failure.expected, failure.actual) == (2160, 2161)
    with pytest.raises(CoherenceError):
        StableFamily(1, Fraction(4), 4, (lower, faulty))


def test_family_shape_is_checked(e8):
    with pytest.raises(DimensionMismatchError):
        check_stability([theta_expansion(e8, 0, 4), theta_expansion(e8, 2, 4)])
    with pytest.raises(DimensionMismatchError):
        check_stability([theta_expansion(e8, 0, 2), theta_expansion(e8, 1, 4)])


def test_igusa_vanishes_in_low_genus():
    assert igusa_form(0, 6).is_zero()
    assert igusa_form(1, 2).is_zero()
    assert igusa_form(2, 2).is_zero()
    form = igusa_form(1, 2)
    assert form.weight == 8
    assert form.label == "IGUSA"


@pytest.mark.slow
def test_igusa_vanishes_at_genus_two_and_three():
    assert igusa_form(1, 8).is_zero()
    assert igusa_form(2, 6).is_zero()
    assert igusa_form(3, 4).is_zero()


@pytest.mark.slow
def test_igusa_vanishes_at_genus_three_trace_six():
    form = igusa_form(3, 6)
    assert form.complete
    assert all(value == 0 for value in form.coeffs.values())


def test_cusp_check(e8):
    assert cusp_surrogate_check(igusa_form(2, 2)).passed
    report = cusp_surrogate_check(theta_expansion(e8, 1, 4))
    assert not report.passed
    assert report.violations[0] == (FourierIndex(((0,),)), 1)


def test_schottky_candidates():
    assert schottky_candidates(6) == []
    candidates = schottky_candidates(8)
    assert candidates
    assert all(index.diagonal == (2, 2, 2, 2) and index.genus == 4 for index in candidates)
    assert FourierIndex(tuple(tuple(2 * int(i == j) for j in range(4)) for i in range(4))) in candidates


def test_no_witness_below_trace_eight():
    assert schottky_witness(6) is None


@pytest.mark.slow
def test_schottky_witness():
    found = schottky_witness(8)
    assert found is not None
    index, difference = found
    assert difference != 0
    assert index.determinant() != 0
    assert igusa_form(4, 8, indices=[index]).coefficient(index) == difference


def test_operator_regimes():
    assert siegel_operator_regime(4, 9).injective
    assert not siegel_operator_regime(4, 9).isomorphism
    assert siegel_operator_regime(4, 10).isomorphism
    assert siegel_operator_regime(4, 1).maass_isomorphism
    assert not siegel_operator_regime(3, 1).maass_isomorphism
    assert siegel_operator_regime(3, 2).notes
    assert not siegel_operator_regime(8, 3).notes
