"""Numeral and division clearing.

The surface language allows rational literals and ``/``. Neither is part of
the core grammar, so every comparison ``a/b >= c/d`` is rewritten as
``a*d >= c*b`` with rationals turned into repeated ``P(true)`` sums. A bound
variable inside a denominator has no such rewrite and is rejected.
"""
from __future__ import annotations

from fractions import Fraction

from .syntax import (
    Add, ConstSym, Div, FormulaError, Geq, Mul, Neg, Num, Prob, RangeSym, Sum,
    free_vars, mul, numeral,
)


class DenominatorError(FormulaError):
    """A summation's bound variable occurs in a denominator."""


def clear(t):
    """Return (numerator, denominator) core terms; the denominator is None
    when it is the unit."""
    if isinstance(t, Num):
        q = Fraction(t.value)
        num = numeral(abs(q.numerator))
        if q.numerator < 0:
            num = Neg(num)
        return num, (numeral(q.denominator) if q.denominator != 1 else None)
    if isinstance(t, (Prob, ConstSym, RangeSym)):
        return t, None
    if isinstance(t, Neg):
        n, d = clear(t.arg)
        return Neg(n), d
    if isinstance(t, Add):
        nx, dx = clear(t.left)
        ny, dy = clear(t.right)
        if dx == dy:
            return Add(nx, ny), dx
        return Add(mul(nx, dy), mul(ny, dx)), mul(dx, dy)
    if isinstance(t, Mul):
        nx, dx = clear(t.left)
        ny, dy = clear(t.right)
        return Mul(nx, ny), mul(dx, dy)
    if isinstance(t, Div):
        nx, dx = clear(t.num)
        ny, dy = clear(t.den)
        return mul(nx, dy), mul(dx, ny)
    if isinstance(t, Sum):
        n, d = clear(t.body)
        if d is not None and t.bound in free_vars(d):
            raise DenominatorError(
                f"bound variable {t.bound} occurs in a denominator")
        return Sum(t.bound, n), d
    raise FormulaError(f"not a term: {t!r}")


def expand_numerals(t):
    """Core term for a macro term whose denominators all clear to the unit."""
    n, d = clear(t)
    if d is not None:
        raise FormulaError("term has a non-trivial denominator; compare it instead")
    return n


def compare(left, right):
    """Core Geq(left, right) with denominators cleared across the comparison.

    Denominators are assumed positive (they are probabilities or numerals), so
    cross-multiplication keeps the direction of the inequality.
    """
    nl, dl = clear(left)
    nr, dr = clear(right)
    return Geq(mul(nl, dr), mul(nr, dl))
