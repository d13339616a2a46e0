import numpy as np

from StableTheta.tools.matrix_validator import MatrixValidator


def test_square_and_integral():
    assert MatrixValidator.validate_square([[1, 2], [3, 4]])[0]
    ok, message = MatrixValidator.validate_square([[1, 2], [3]])
    assert not ok and "row 1" in message
    assert MatrixValidator.validate_integral([[1, np.int64(2)]])[0]
    assert not MatrixValidator.validate_integral([[1, 2.0]])[0]
    assert not MatrixValidator.validate_integral([[True]])[0]


def test_symmetric_and_even():
    assert MatrixValidator.validate_symmetric([[2, 1], [1, 2]])[0]
    assert not MatrixValidator.validate_symmetric([[2, 1], [0, 2]])[0]
    assert MatrixValidator.validate_symmetric([[2.0, 1.0], [1.0 + 1e-13, 2.0]], tolerance=1e-12)[0]
    assert MatrixValidator.validate_even_diagonal([[2, 1], [1, 4]])[0]
    assert not MatrixValidator.validate_even_diagonal([[2, 1], [1, 3]])[0]


def test_vector():
    assert MatrixValidator.validate_vector([1, 0, -1], 3)[0]
    assert not MatrixValidator.validate_vector([1, 0], 3)[0]
    assert not MatrixValidator.validate_vector([1, 0.5, 0], 3)[0]


def test_real_matrices():
    assert MatrixValidator.validate_real_symmetric(np.eye(2), 2, 1e-12)[0]
    assert not MatrixValidator.validate_real_symmetric(np.eye(3), 2, 1e-12)[0]
    assert not MatrixValidator.validate_real_symmetric(np.array([[1.0, np.nan], [np.nan, 1.0]]), 2, 1e-12)[0]
    assert MatrixValidator.validate_positive_definite(np.array([[2.0, 1.0], [1.0, 1.0]]))[0]
    assert not MatrixValidator.validate_positive_definite(np.array([[1.0, 2.0], [2.0, 1.0]]))[0]
