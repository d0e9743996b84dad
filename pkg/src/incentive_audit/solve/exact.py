"""Exact rational linear algebra for the quadratic fast paths.

Systems here are tiny (n agents, n <= 4 in practice), so plain fraction
Gaussian elimination and Laplace determinants are both exact and fast.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

Matrix = Sequence[Sequence[Fraction]]


def solve_linear(a: Matrix, b: Sequence[Fraction]) -> Optional[list[Fraction]]:
    """Solve ``a x = b`` exactly; None when the matrix is singular."""
    n = len(b)
    m = [[Fraction(a[i][j]) for j in range(n)] + [Fraction(b[i])]
         for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [v - factor * w for v, w in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def determinant(a: Matrix) -> Fraction:
    n = len(a)
    if n == 1:
        return Fraction(a[0][0])
    if n == 2:
        return Fraction(a[0][0]) * a[1][1] - Fraction(a[0][1]) * a[1][0]
    det = Fraction(0)
    for j in range(n):
        if a[0][j] == 0:
            continue
        minor = [[a[r][c] for c in range(n) if c != j] for r in range(1, n)]
        det += (-1) ** j * Fraction(a[0][j]) * determinant(minor)
    return det


def is_positive_definite(a: Matrix) -> bool:
    """Sylvester criterion on a symmetric matrix, exact."""
    n = len(a)
    for k in range(1, n + 1):
        lead = [[a[i][j] for j in range(k)] for i in range(k)]
        if determinant(lead) <= 0:
            return False
    return True
