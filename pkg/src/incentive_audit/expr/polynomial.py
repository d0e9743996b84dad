"""Canonical polynomial form: expansion, dependency and separability analysis.

A Polynomial maps monomials to exact rational coefficients.  Monomial keys
are tuples of ``(variable index, exponent)`` pairs, sorted by variable,
with zero exponents dropped; the empty tuple is the constant monomial.
Expansion is the canonical form used for structural equality, dependency
detection and separability checks.  Trees containing absolute-value or
guarded-division nodes have no polynomial form and yield ``None``, which
keeps downstream structure checks conservative.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .nodes import (
    Abs,
    Const,
    Expression,
    Neg,
    Number,
    Power,
    Product,
    SafeDiv,
    Sum,
    Var,
    add,
    const,
    mul,
    power,
    var,
)

Monomial = tuple[tuple[int, int], ...]


class Polynomial:
    """Multivariate polynomial with Fraction coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, Fraction] | None = None):
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coeff in terms.items():
                if coeff != 0:
                    self.terms[mono] = coeff

    @staticmethod
    def constant(value: Number) -> "Polynomial":
        return Polynomial({(): Fraction(value)})

    @staticmethod
    def variable(index: int) -> "Polynomial":
        return Polynomial({((index, 1),): Fraction(1)})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"Polynomial({self.terms!r})"

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for mono, coeff in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + coeff
        return Polynomial(out)

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _merge_monomials(m1, m2)
                out[mono] = out.get(mono, Fraction(0)) + c1 * c2
        return Polynomial(out)

    def __pow__(self, exponent: int) -> "Polynomial":
        result = Polynomial.constant(1)
        base = self
        k = exponent
        while k > 0:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def evaluate(self, values: Sequence[Number]) -> Number:
        total: Number = Fraction(0)
        for mono, coeff in self.terms.items():
            term: Number = coeff
            for idx, exp in mono:
                term = term * values[idx] ** exp
            total = total + term
        return total

    def variables(self) -> frozenset[int]:
        out: set[int] = set()
        for mono in self.terms:
            for idx, _ in mono:
                out.add(idx)
        return frozenset(out)

    def degree(self) -> int:
        if not self.terms:
            return 0
        return max((sum(e for _, e in mono) for mono in self.terms), default=0)

    def is_constant(self) -> bool:
        return all(mono == () for mono in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def linear_coefficients(self, n: int) -> Optional[tuple[list[Fraction], Fraction]]:
        """Return (coefficients, constant) when degree <= 1, else None."""
        if self.degree() > 1:
            return None
        coeffs = [Fraction(0)] * n
        constant = Fraction(0)
        for mono, coeff in self.terms.items():
            if mono == ():
                constant = coeff
            else:
                idx, _ = mono[0]
                coeffs[idx] = coeff
        return coeffs, constant

    def quadratic_form(self, n: int) -> Optional[tuple[list[list[Fraction]], list[Fraction], Fraction]]:
        """Decompose a degree<=2 polynomial as (1/2) u'Qu + b'u + c.

        Q is symmetric with exact entries; returns None for degree > 2.
        """
        if self.degree() > 2:
            return None
        Q = [[Fraction(0)] * n for _ in range(n)]
        b = [Fraction(0)] * n
        c = Fraction(0)
        for mono, coeff in self.terms.items():
            if mono == ():
                c = coeff
            elif len(mono) == 1:
                idx, exp = mono[0]
                if exp == 1:
                    b[idx] = coeff
                else:
                    Q[idx][idx] = 2 * coeff
            else:
                (i, _), (j, _) = mono
                Q[i][j] += coeff
                Q[j][i] += coeff
        return Q, b, c

    def to_expression(self) -> Expression:
        """Canonical expression: monomials in graded-lexicographic order."""
        if not self.terms:
            return const(0)

        def key(mono: Monomial):
            return (sum(e for _, e in mono), mono)

        parts = []
        for mono in sorted(self.terms, key=key):
            coeff = self.terms[mono]
            factors: list[Expression] = [const(coeff)]
            for idx, exp in mono:
                factors.append(power(var(idx), exp))
            parts.append(mul(*factors))
        return add(*parts)

    def to_arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Float coefficient vector and (m, n) exponent matrix for kernels."""
        m = max(len(self.terms), 1)
        coeffs = np.zeros(m, dtype=np.float64)
        exps = np.zeros((m, n), dtype=np.int64)
        for row, (mono, coeff) in enumerate(sorted(self.terms.items())):
            coeffs[row] = float(coeff)
            for idx, exp in mono:
                exps[row, idx] = exp
        return coeffs, exps


def _merge_monomials(a: Monomial, b: Monomial) -> Monomial:
    exps: dict[int, int] = dict(a)
    for idx, e in b:
        exps[idx] = exps.get(idx, 0) + e
    return tuple(sorted((i, e) for i, e in exps.items() if e > 0))


def as_polynomial(e: Expression) -> Optional[Polynomial]:
    """Expand to canonical polynomial form; None if abs/safediv present."""
    if isinstance(e, Const):
        return Polynomial.constant(e.value)
    if isinstance(e, Var):
        return Polynomial.variable(e.index)
    if isinstance(e, Sum):
        total = Polynomial()
        for t in e.terms:
            p = as_polynomial(t)
            if p is None:
                return None
            total = total + p
        return total
    if isinstance(e, Product):
        prod = Polynomial.constant(1)
        for f in e.factors:
            p = as_polynomial(f)
            if p is None:
                return None
            prod = prod * p
        return prod
    if isinstance(e, Power):
        p = as_polynomial(e.base)
        return None if p is None else p**e.exponent
    if isinstance(e, Neg):
        p = as_polynomial(e.operand)
        return None if p is None else -p
    if isinstance(e, (Abs, SafeDiv)):
        return None
    raise TypeError(f"unknown expression node {type(e).__name__}")


def expand(e: Expression) -> Expression:
    """Canonical expanded form; returns ``e`` unchanged when not polynomial."""
    p = as_polynomial(e)
    return e if p is None else p.to_expression()


def structurally_equal(a: Expression, b: Expression) -> bool:
    """Equality of expanded polynomial forms (falls back to node equality)."""
    pa, pb = as_polynomial(a), as_polynomial(b)
    if pa is not None and pb is not None:
        return pa == pb
    return a == b


def dependencies(e: Expression) -> frozenset[int]:
    """Variables that actually matter after expansion.

    Polynomial trees are exact (zero-coefficient variables vanish).
    Non-polynomial nodes recurse conservatively: a variable surviving in
    any smooth subtree under an abs/safediv node is kept.
    """
    p = as_polynomial(e)
    if p is not None:
        return p.variables()
    if isinstance(e, Sum):
        out: frozenset[int] = frozenset()
        for t in e.terms:
            out |= dependencies(t)
        return out
    if isinstance(e, Product):
        out = frozenset()
        for f in e.factors:
            out |= dependencies(f)
        return out
    if isinstance(e, Power):
        return dependencies(e.base)
    if isinstance(e, (Neg, Abs)):
        return dependencies(e.operand)
    if isinstance(e, SafeDiv):
        return dependencies(e.numerator) | dependencies(e.denominator)
    raise TypeError(f"unknown expression node {type(e).__name__}")


def separable_decomposition(e: Expression) -> Optional[list[tuple[int, Expression]]]:
    """Split ``e`` into per-variable components summing back to ``e``.

    Succeeds iff no expanded monomial mixes two variables.  The constant
    term rides on the lowest-index component (any split is equivalent:
    the components are unique up to additive constants).  Returns None
    both for genuinely non-separable polynomials and for non-polynomial
    trees, where separability cannot be certified.
    """
    p = as_polynomial(e)
    if p is None:
        return None
    groups: dict[int, dict[Monomial, Fraction]] = {}
    constant = Fraction(0)
    for mono, coeff in p.terms.items():
        if mono == ():
            constant += coeff
            continue
        if len(mono) > 1:
            return None
        idx = mono[0][0]
        groups.setdefault(idx, {})[mono] = coeff
    if not groups:
        return [(0, const(constant))]
    first = min(groups)
    if constant != 0:
        groups[first][()] = constant
    return [(idx, Polynomial(groups[idx]).to_expression())
            for idx in sorted(groups)]


def hessian(e: Expression, n: int) -> list[list[Expression]]:
    """Symmetric n-by-n matrix of second partials (canonicalized)."""
    from .nodes import diff

    grad = [diff(e, i) for i in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            row.append(expand(diff(grad[i], j)))
        out.append(row)
    return out
