import logging

import numpy as np
import pytest

from StableTheta.analysis.symplectic import (
    ScalarWeight,
    SiegelPoint,
    SymplecticElement,
    act,
    automorphy_factor,
    boundary_family,
    descend_p,
    embed_group,
    embed_point,
    eval_expansion,
    lift_handle,
    lift_q,
    random_unitary,
    run_operator_suite,
    siegel_l,
    siegel_section,
    sp3_boundedness,
)
from StableTheta.config.settings import DEFAULT_CONFIG
from StableTheta.exceptions import DimensionMismatchError, InvalidFormError, SingularActionError
from StableTheta.forms.fourier import Expansion, FourierIndex, constant_expansion, theta_expansion

TOLERANCES = {key: DEFAULT_CONFIG[key]
              for key in ("operator_tolerance", "cocycle_tolerance", "eval_tail_tolerance", "conditioning_limit")}


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


def test_point_validation():
    with pytest.raises(DimensionMismatchError):
        SiegelPoint(np.zeros((2, 2)), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(DimensionMismatchError):
        SiegelPoint(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))
    z = SiegelPoint.scalar(3, 2.0)
    assert z.genus == 3
    assert z.min_imaginary_eigenvalue() == pytest.approx(2.0)


def test_element_validation():
    with pytest.raises(InvalidFormError):
        SymplecticElement(np.eye(2), np.eye(2), np.eye(2), np.eye(2))
    with pytest.raises(DimensionMismatchError):
        SymplecticElement(np.eye(2), np.zeros((2, 2)), np.zeros((2, 2)), np.eye(3))


def test_group_operations(rng):
    g = SymplecticElement.random(3, rng)
    product = (g @ g.inverse()).to_matrix()
    assert np.allclose(product, np.eye(6), atol=1e-9)
    k = SymplecticElement.from_unitary(random_unitary(3, rng))
    base = SiegelPoint.scalar(3)
    assert np.allclose(act(k, base).z, base.z, atol=1e-12)


def test_action(rng):
    z = SiegelPoint.random(2, rng)
    assert np.allclose(act(SymplecticElement.identity(2), z).z, z.z)
    i = SiegelPoint.scalar(1)
    assert np.allclose(act(SymplecticElement.standard_j(1), i).z, [[1j]])
    shifted = act(SymplecticElement.translation(np.eye(2)), z)
    assert np.allclose(shifted.z, z.z + np.eye(2))


def test_action_and_cocycle_compose(rng):
    w = ScalarWeight(4)
    for _ in range(20):
        g1, g2 = SymplecticElement.random(2, rng), SymplecticElement.random(2, rng)
        z = SiegelPoint.random(2, rng)
        inner = act(g2, z)
        assert np.allclose(act(g1 @ g2, z).z, act(g1, inner).z, atol=1e-9)
        product = automorphy_factor(g1, inner, w) * automorphy_factor(g2, z, w)
        assert automorphy_factor(g1 @ g2, z, w) == pytest.approx(product, rel=1e-9)


def test_ill_conditioned_action():
    with pytest.raises(SingularActionError):
        act(SymplecticElement.standard_j(1), SiegelPoint.scalar(1), conditioning_limit=0.5)


def test_weight_zero_factor_is_one(rng):
    g = SymplecticElement.random(2, rng)
    assert automorphy_factor(g, SiegelPoint.random(2, rng), ScalarWeight(0)) == 1


def test_eval_expansion(e8):
    theta = theta_expansion(e8, 1, 6)
    z = SiegelPoint.scalar(1, 2.0)
    q = np.exp(-4 * np.pi)
    result = eval_expansion(theta, z)
    assert result.value == pytest.approx(1 + 240 * q + 2160 * q ** 2 + 6720 * q ** 3, rel=1e-14)
    assert not result.flagged
    assert eval_expansion(theta, SiegelPoint.scalar(1, 0.1)).flagged
    with pytest.raises(DimensionMismatchError):
        eval_expansion(theta, SiegelPoint.scalar(2))


def test_lift_and_descend(e8, rng):
    w = ScalarWeight(4)
    theta = theta_expansion(e8, 2, 4)
    handle = lift_handle(theta, w)
    z = SiegelPoint.random(2, rng)
    direct = eval_expansion(theta, z).value
    assert descend_p(handle, z, w) == pytest.approx(direct, rel=1e-9)
    k = SymplecticElement.from_unitary(random_unitary(2, rng))
    assert descend_p(handle, z, w, siegel_section(z) @ k) == pytest.approx(direct, rel=1e-9)
    with pytest.raises(DimensionMismatchError):
        descend_p(handle, z, w, SymplecticElement.identity(2))
    with pytest.raises(DimensionMismatchError):
        lift_q(theta, SymplecticElement.identity(2), ScalarWeight(8))


def test_section_lies_over_point(rng):
    z = SiegelPoint.random(3, rng)
    assert np.allclose(act(siegel_section(z), SiegelPoint.scalar(3)).z, z.z, atol=1e-10)


def test_boundary_family_image():
    g = SymplecticElement.translation(np.array([[0.5]]))
    gt = boundary_family(g, 3, 100.0)
    image = act(gt, SiegelPoint.scalar(3))
    expected = np.diag([0.5 + 1j, 100j, 100j])
    assert np.allclose(image.z, expected)
    with pytest.raises(DimensionMismatchError):
        boundary_family(g, 1, 100.0)


def test_limit_matches_lower_genus(e8, rng):
    w = ScalarWeight(4)
    upper, lower = theta_expansion(e8, 2, 6), theta_expansion(e8, 1, 6)
    g = SymplecticElement.random(1, rng)
    result = siegel_l(lift_handle(upper, w), g, 2, [1e2, 1e3, 1e4], w)
    assert result.value == pytest.approx(lift_q(lower, g, w), rel=1e-9)
    assert not result.report.diverged
    with pytest.raises(DimensionMismatchError):
        siegel_l(lift_handle(upper, w), SymplecticElement.identity(2), 2, [1e2], w)


def test_embeddings(rng):
    gamma = SymplecticElement.random(1, rng)
    z = SiegelPoint.random(1, rng)
    lhs = embed_point(act(gamma, z), 3).z
    rhs = act(embed_group(gamma, 3), embed_point(z, 3)).z
    assert np.allclose(lhs, rhs, atol=1e-10)
    with pytest.raises(DimensionMismatchError):
        embed_point(z, 1)


def test_boundedness_along_ray(e8):
    report = sp3_boundedness(theta_expansion(e8, 1, 6), ScalarWeight(4), [1.0, 10.0, 100.0])
    assert report.bounded
    assert report.magnitudes[-1] == pytest.approx(1.0, rel=1e-12)


def test_operator_suite_on_theta(e8):
    expansions = {n: theta_expansion(e8, n, 6) for n in (1, 2)}
    suite = run_operator_suite(expansions, ScalarWeight(4), [1e2, 1e3, 1e4], TOLERANCES, seed=7,
                               cocycle_samples=20, point_samples=5, limit_samples=2)
    assert suite.passed, [(c.name, c.deviation) for c in suite.checks if not c.passed]
    names = [check.name for check in suite.checks]
    assert "L∘Q = Q∘Φ" in names and "P∘L = Φ∘P" in names
    assert not any(report.diverged for report in suite.convergence)


def test_operator_suite_weight_zero():
    expansions = {n: constant_expansion(n, 1, 2) for n in (1, 2)}
    suite = run_operator_suite(expansions, ScalarWeight(0), [1e2, 1e3, 1e4], TOLERANCES, seed=1,
                               cocycle_samples=5, point_samples=3, limit_samples=1)
    assert suite.passed
    deviations = {check.name: check.deviation for check in suite.checks}
    assert deviations["cocycle"] == 0.0
    assert deviations["L∘Q = Q∘Φ"] == 0.0


def test_single_point_schedule_warns():
    expansions = {n: constant_expansion(n, 1, 2) for n in (1, 2)}
    suite = run_operator_suite(expansions, ScalarWeight(0), [1e2], TOLERANCES, seed=1,
                               cocycle_samples=1, point_samples=1, limit_samples=1)
    assert any("single point" in warning for warning in suite.warnings())


def test_embedding_equivariance_on_random_samples(rng):
    for _ in range(20):
        gamma = SymplecticElement.random(1, rng)
        z = SiegelPoint.random(1, rng)
        for l in (2, 3):
            lhs = embed_point(act(gamma, z), l).z
            rhs = act(embed_group(gamma, l), embed_point(z, l)).z
            assert np.allclose(lhs, rhs, atol=1e-10)
            other = SymplecticElement.random(1, rng)
            assert np.allclose(embed_group(gamma @ other, l).to_matrix(),
                               (embed_group(gamma, l) @ embed_group(other, l)).to_matrix(), atol=1e-10)


def test_unimodular_rotation_of_theta(e8, rng):
    w = ScalarWeight(4)
    theta = theta_expansion(e8, 2, 6)
    for u in (np.array([[0.0, 1.0], [1.0, 0.0]]), np.diag([1.0, -1.0]), np.array([[1.0, 1.0], [0.0, 1.0]])):
        g = SymplecticElement.rotation(u)
        z = SiegelPoint.random(2, rng, y_min=2.0)
        lhs = eval_expansion(theta, act(g, z)).value
        assert lhs == pytest.approx(automorphy_factor(g, z, w) * eval_expansion(theta, z).value, rel=1e-12)


def test_modularity_checks_catch_asymmetric_coefficients(e8):
    theta = theta_expansion(e8, 2, 6)
    coeffs = dict(theta.coeffs)
    coeffs[FourierIndex(((2, 1), (1, 2)))] += 10**4
    coeffs[FourierIndex(((2, 0), (0, 4)))] += 10**4
    broken = Expansion(2, theta.weight, 6, coeffs, "BROKEN")
    suite = run_operator_suite({2: broken}, ScalarWeight(4), [1e2, 1e3, 1e4], TOLERANCES, seed=3,
                               cocycle_samples=2, point_samples=8, limit_samples=1)
    deviations = {check.name: check for check in suite.checks}
    assert not deviations["modularity: signed permutations"].passed
    assert deviations["modularity: translations"].passed


def test_modularity_checks_sample_every_kind(e8):
    expansions = {n: theta_expansion(e8, n, 6) for n in (1, 2)}
    suite = run_operator_suite(expansions, ScalarWeight(4), [1e2, 1e3, 1e4], TOLERANCES, seed=11,
                               cocycle_samples=2, point_samples=4, limit_samples=1)
    checks = {check.name: check for check in suite.checks}
    assert checks["modularity: translations"].samples == 8
    assert checks["modularity: signed permutations"].samples == 8
    assert checks["modularity: unimodular shears"].samples == 4
    assert checks["modularity: J"].samples >= 1
    assert all(check.passed for name, check in checks.items() if name.startswith("modularity"))


def test_tail_tolerance_is_read_from_settings(caplog):
    expansions = {1: constant_expansion(1, 1, 2)}

    def flagged_evaluations(tail_tolerance):
        caplog.clear()
        tolerances = dict(TOLERANCES, eval_tail_tolerance=tail_tolerance)
        with caplog.at_level(logging.DEBUG, logger="StableTheta.analysis.symplectic"):
            run_operator_suite(expansions, ScalarWeight(0), [1e2], tolerances, seed=1,
                               cocycle_samples=1, point_samples=1, limit_samples=1)
        return sum(record.levelno == logging.DEBUG and "truncation tail" in record.getMessage()
                   for record in caplog.records)

    assert flagged_evaluations(1e-300) > flagged_evaluations(1.0)


@pytest.mark.slow
def test_operator_suite_on_theta_through_genus_three(e8):
    expansions = {n: theta_expansion(e8, n, 6) for n in (1, 2, 3)}
    suite = run_operator_suite(expansions, ScalarWeight(4), [1e2, 1e3, 1e4], TOLERANCES, seed=5,
                               cocycle_samples=20, point_samples=4, limit_samples=2)
    assert suite.passed, [(c.name, c.deviation) for c in suite.checks if not c.passed]
    checks = {check.name: check for check in suite.checks}
    for name in ("L∘Q = Q∘Φ", "P∘L = Φ∘P"):
        assert checks[name].samples == 2 * 2
        assert checks[name].deviation <= 1e-6
    assert not any(report.diverged for report in suite.convergence)
