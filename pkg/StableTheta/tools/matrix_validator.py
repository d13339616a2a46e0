"""
StableTheta Matrix Validation Tools
Shape, symmetry and integrality checks shared by the lattice and form modules
"""

from typing import Any, Sequence, Tuple

import numpy as np


class MatrixValidator:
    """Validates matrices before they become forms, indices or points"""

    @staticmethod
    def validate_square(matrix: Sequence[Sequence[Any]]) -> Tuple[bool, str]:
        """
        Check that a nested sequence is a square matrix

        Args:
            matrix: Rows of the matrix

        Returns:
            Tuple of (is_valid, error_message)
        """
        n = len(matrix)
        for i, row in enumerate(matrix):
            if len(row) != n:
                return False, f"row {i} has {len(row)} entries, expected {n}"
        return True, ""

    @staticmethod
    def validate_integral(matrix: Sequence[Sequence[Any]]) -> Tuple[bool, str]:
        """Check that every entry is a Python or numpy integer (bools rejected)"""
        for i, row in enumerate(matrix):
            for j, value in enumerate(row):
                if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                    return False, f"entry ({i},{j}) = {value!r} is not an integer"
        return True, ""

    @staticmethod
    def validate_symmetric(matrix: Sequence[Sequence[Any]], tolerance: float = 0.0) -> Tuple[bool, str]:
        """
        Check symmetry, exactly or within a tolerance

        Args:
            matrix: Square matrix
            tolerance: 0 for exact comparison

        Returns:
            Tuple of (is_valid, error_message)
        """
        n = len(matrix)
        for i in range(n):
            for j in range(i + 1, n):
                if tolerance == 0.0:
                    if matrix[i][j] != matrix[j][i]:
                        return False, f"entries ({i},{j}) and ({j},{i}) differ"
                elif abs(matrix[i][j] - matrix[j][i]) > tolerance:
                    return False, f"entries ({i},{j}) and ({j},{i}) differ by more than {tolerance:g}"
        return True, ""

    @staticmethod
    def validate_even_diagonal(matrix: Sequence[Sequence[int]]) -> Tuple[bool, str]:
        """Check that every diagonal entry is even"""
        for i in range(len(matrix)):
            if matrix[i][i] % 2:
                return False, f"diagonal entry {i} = {matrix[i][i]} is odd"
        return True, ""

    @staticmethod
    def validate_vector(vector: Sequence[Any], length: int) -> Tuple[bool, str]:
        """Check an integer vector of the given length"""
        if len(vector) != length:
            return False, f"vector has length {len(vector)}, expected {length}"
        for i, value in enumerate(vector):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                return False, f"component {i} = {value!r} is not an integer"
        return True, ""

    @staticmethod
    def validate_real_symmetric(array: np.ndarray, n: int, tolerance: float) -> Tuple[bool, str]:
        """Check a float array of shape (n, n) that is symmetric within tolerance"""
        if array.shape != (n, n):
            return False, f"expected shape {(n, n)}, got {array.shape}"
        if not np.all(np.isfinite(array)):
            return False, "matrix has non-finite entries"
        asym = float(np.max(np.abs(array - array.T))) if n else 0.0
        if asym > tolerance:
            return False, f"matrix is not symmetric (max asymmetry {asym:.3e})"
        return True, ""

    @staticmethod
    def validate_positive_definite(array: np.ndarray) -> Tuple[bool, str]:
        """Check positive definiteness of a real symmetric array via its smallest eigenvalue"""
        if array.shape[0] == 0:
            return True, ""
        smallest = float(np.linalg.eigvalsh(array)[0])
        if smallest <= 0.0:
            return False, f"matrix is not positive definite (smallest eigenvalue {smallest:.3e})"
        return True, ""
