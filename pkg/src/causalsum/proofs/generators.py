"""Premise generators for infinitary rules: name -> (index -> sub-proof).

A sub-proof is a list of nodes whose last formula must be the rule's premise
at that index.
"""
from __future__ import annotations

from fractions import Fraction

from ..syntax import EAtom, Const, Geq, Mul, Prob, approx, implies, numeral, one, zero
from .checker import Axiom, Node

REGISTRY: dict = {}


def register(name):
    def deco(fn):
        REGISTRY[name] = fn
        return fn
    return deco


def conv_zero_phi():
    """P(X=c1) == 0, the antecedent of the Conv corpus family."""
    return approx(conv_zero_term(), zero())


def conv_zero_term():
    return Prob(EAtom("X", Const("X", 1)))


@register("conv_zero")
def conv_zero(n: int) -> list:
    """P(X=c1) == 0 -> P(X=c1) <= 1/n, by n times the second hypothesis plus 1."""
    t = conv_zero_term()
    f = implies(conv_zero_phi(), Geq(one(), Mul(t, numeral(n))))
    return [Node("p", f, Axiom("PolyBase:Lin", (Fraction(0), Fraction(n), Fraction(1))))]


@register("conv_broken_after_3")
def conv_broken_after_3(n: int) -> list:
    """Correct up to n = 3, then claims a premise it cannot certify."""
    if n <= 3:
        return conv_zero(n)
    t = conv_zero_term()
    f = implies(conv_zero_phi(), Geq(one(), Mul(t, numeral(n))))
    return [Node("p", f, Axiom("PolyBase:Lin", (Fraction(0), Fraction(0), Fraction(0))))]
