from fractions import Fraction

import pytest

from StableTheta.utils.helpers import (
    bareiss_determinant,
    congruence,
    exact_inverse,
    format_matrix_for_display,
    format_upper_triangle,
    leading_minors,
    parse_number_list,
    parse_square_matrix,
)


def test_bareiss_determinant():
    assert bareiss_determinant([[2, 1], [1, 2]]) == 3
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1
    assert bareiss_determinant([[1, 2], [2, 4]]) == 0
    assert bareiss_determinant([]) == 1
    assert bareiss_determinant([[Fraction(1, 2), 0], [0, 4]]) == 2


def test_bareiss_determinant_needs_square():
    with pytest.raises(ValueError):
        bareiss_determinant([[1, 2], [3]])


def test_minors():
    assert leading_minors([[2, 1, 0], [1, 2, 1], [0, 1, 2]]) == [2, 3, 4]


def test_exact_inverse():
    assert exact_inverse([[2, 1], [1, 1]]) == [[1, -1], [-1, 2]]
    assert exact_inverse([[2, 0], [0, 4]])[1][1] == Fraction(1, 4)
    with pytest.raises(ValueError):
        exact_inverse([[1, 2], [2, 4]])


def test_congruence():
    assert congruence(((2, 0), (0, 2)), ((1, 1), (0, 1))) == ((2, 2), (2, 4))


def test_parse_number_list():
    assert parse_number_list("100, 1000 1e4") == [100.0, 1000.0, 10000.0]
    with pytest.raises(ValueError):
        parse_number_list("1,x")
    with pytest.raises(ValueError):
        parse_number_list("  ")


def test_parse_square_matrix():
    assert parse_square_matrix("2,1,1,1") == [[2.0, 1.0], [1.0, 1.0]]
    assert parse_square_matrix("2 1; 1 1") == [[2.0, 1.0], [1.0, 1.0]]
    with pytest.raises(ValueError):
        parse_square_matrix("1,2,3")
    with pytest.raises(ValueError):
        parse_square_matrix("1 2; 3")


def test_formatting():
    assert format_upper_triangle(((2, 1), (1, 2))) == "2 1 2"
    assert format_matrix_for_display([[2, 1], [1, 1]]) == "[[2, 1]; [1, 1]]"
    assert format_matrix_for_display([[1.0] * 50], max_length=20).endswith("...")
