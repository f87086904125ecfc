"""Grounding transformations: universal closure, sum unfolding, and the
removal of conditional probabilities.

Unfolding replaces ``sum v . t`` by ``t[v/c1] + ... + t[v/cN]``. It is exact
only in models whose N constants name pairwise distinct values; the sat
pipeline establishes that by casing on constant equalities first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .macros import DenominatorError, expand_numerals  # noqa: F401  (re-export)
from .syntax import (
    Add, And, Const, ConstSym, EAnd, Eq, FormulaError, Geq, Mul, Neg, Not, Prob, RVar,
    RangeSym, Sum, conj, ETop, free_vars, gt, mul, numeral, size, sum_depth,
    substitute_range_var, zero,
)


@dataclass(frozen=True)
class GroundingContext:
    """N constants per variable. ``reps`` optionally restricts the constants
    a sum ranges over for some variables (one representative per value)."""

    n: int
    reps: tuple = ()  # ((var, (Const, ...)), ...)

    def __post_init__(self):
        if self.n < 1:
            raise FormulaError("grounding needs N >= 1")

    def constants(self, var: str) -> list:
        for v, cs in self.reps:
            if v == var:
                return list(cs)
        return [Const(var, i) for i in range(1, self.n + 1)]


def _ctx(ctx) -> GroundingContext:
    if ctx is None:
        raise FormulaError("unbounded signature: sums cannot be unfolded")
    if isinstance(ctx, int):
        return GroundingContext(ctx)
    return ctx


def unfold_sums(node, ctx, numerals: bool = False):
    """Remove every Sum node.

    With ``numerals`` a range variable used as a coefficient becomes the
    numeral ``j`` rather than the constant ``c_j``; that matches the textbook
    rendering ``1*P(X=c1) + 2*P(X=c2)`` and is exact only when each c_j
    denotes the value j.
    """
    ctx = _ctx(ctx)
    return _unfold(node, ctx, numerals)


def _unfold(n, ctx, numerals):
    if isinstance(n, Sum):
        parts = []
        for c in ctx.constants(n.bound.var):
            body = substitute_range_var(n.body, n.bound, c)
            if numerals:
                body = _coefficients_to_numerals(body, c)
            parts.append(_unfold(body, ctx, numerals))
        out = parts[0]
        for p in parts[1:]:
            out = Add(out, p)
        return out
    if isinstance(n, Geq):
        return Geq(_unfold(n.left, ctx, numerals), _unfold(n.right, ctx, numerals))
    if isinstance(n, Not):
        return Not(_unfold(n.arg, ctx, numerals))
    if isinstance(n, And):
        return And(_unfold(n.left, ctx, numerals), _unfold(n.right, ctx, numerals))
    if isinstance(n, Add):
        return Add(_unfold(n.left, ctx, numerals), _unfold(n.right, ctx, numerals))
    if isinstance(n, Mul):
        return Mul(_unfold(n.left, ctx, numerals), _unfold(n.right, ctx, numerals))
    if isinstance(n, Neg):
        return Neg(_unfold(n.arg, ctx, numerals))
    return n


def _coefficients_to_numerals(n, c: Const):
    if isinstance(n, ConstSym) and n.sym == c:
        return numeral(c.index)
    if isinstance(n, (Add, Mul)):
        return type(n)(_coefficients_to_numerals(n.left, c), _coefficients_to_numerals(n.right, c))
    if isinstance(n, Neg):
        return Neg(_coefficients_to_numerals(n.arg, c))
    if isinstance(n, Sum):
        return Sum(n.bound, _coefficients_to_numerals(n.body, c))
    return n


def universal_closure(f, ctx):
    """Conjunction of f[ι] over all maps of its free variables to c_1..c_N,
    in lexicographic order of (variable, index, constant)."""
    ctx = _ctx(ctx)
    fv = sorted(free_vars(f), key=lambda r: (r.var, r.index))
    if not fv:
        return f
    parts = []
    for consts in itertools.product(*(ctx.constants(r.var) for r in fv)):
        g = f
        for r, c in zip(fv, consts):
            g = substitute_range_var(g, r, c)
        parts.append(g)
    return conj(parts)


def closure_count(f, ctx) -> int:
    ctx = _ctx(ctx)
    return ctx.n ** len(free_vars(f))


# ---------------------------------------------------------------------------
# conditional elimination


def _clear_cond(t):
    """(numerator, denominator) with every P(a|b) read as P(a & b)/P(b)."""
    if isinstance(t, Prob):
        if isinstance(t.cond, ETop):
            return t, None
        return Prob(EAnd(t.event, t.cond), ETop()), Prob(t.cond, ETop())
    if isinstance(t, (ConstSym, RangeSym)):
        return t, None
    if isinstance(t, Neg):
        n, d = _clear_cond(t.arg)
        return Neg(n), d
    if isinstance(t, Add):
        nx, dx = _clear_cond(t.left)
        ny, dy = _clear_cond(t.right)
        if dx == dy:
            return Add(nx, ny), dx
        return Add(mul(nx, dy), mul(ny, dx)), mul(dx, dy)
    if isinstance(t, Mul):
        nx, dx = _clear_cond(t.left)
        ny, dy = _clear_cond(t.right)
        return Mul(nx, ny), mul(dx, dy)
    if isinstance(t, Sum):
        n, d = _clear_cond(t.body)
        if d is not None and t.bound in free_vars(d):
            raise DenominatorError(
                f"conditioning event under sum {t.bound} depends on the bound variable; "
                "unfold sums first")
        return Sum(t.bound, n), d
    raise FormulaError(f"not a term: {t!r}")


def _conditions(t, out: list):
    if isinstance(t, Prob):
        if not isinstance(t.cond, ETop) and t.cond not in out:
            out.append(t.cond)
    elif isinstance(t, (Add, Mul)):
        _conditions(t.left, out)
        _conditions(t.right, out)
    elif isinstance(t, Neg):
        _conditions(t.arg, out)
    elif isinstance(t, Sum):
        _conditions(t.body, out)


def eliminate_conditionals(f, guard: bool = False, path: str = "0"):
    """Rewrite every comparison so that no conditional probability remains.

    ``P(a|b) >= t`` becomes ``P(a & b) >= t * P(b)``; in general both sides are
    brought over a common denominator and cross-multiplied. The result agrees
    with the input on every model where the conditioning events have positive
    probability. With ``guard`` each rewritten comparison is conjoined with
    ``P(b) > 0`` for its conditions, which makes the rewrite exact on every
    model (an undefined side makes a comparison false).
    """
    if isinstance(f, Geq):
        try:
            nl, dl = _clear_cond(f.left)
            nr, dr = _clear_cond(f.right)
        except DenominatorError as exc:
            raise DenominatorError(f"{exc} (at {path})") from None
        if dl is None and dr is None:
            return f
        out = Geq(mul(nl, dr), mul(nr, dl))
        if guard:
            conds = []
            _conditions(f.left, conds)
            _conditions(f.right, conds)
            out = conj([out] + [gt(Prob(c, ETop()), zero()) for c in conds])
        return out
    if isinstance(f, Not):
        return Not(eliminate_conditionals(f.arg, guard, path + ".0"))
    if isinstance(f, And):
        return And(eliminate_conditionals(f.left, guard, path + ".0"),
                   eliminate_conditionals(f.right, guard, path + ".1"))
    return f


def has_conditionals(f) -> bool:
    from .syntax import iter_nodes
    return any(isinstance(n, Prob) and not isinstance(n.cond, ETop) for n in iter_nodes(f))


@dataclass(frozen=True)
class GroundStats:
    size_in: int
    size_out: int
    depth: int
    bound: int


def size_bound(f, n: int) -> int:
    """Upper bound |f| * N^d * 4N on the size after unfolding with numerals,
    d the maximal nesting depth of sums."""
    return size(f) * (n ** sum_depth(f)) * 4 * n


def ground_stats(f, ctx, numerals: bool = False) -> GroundStats:
    ctx = _ctx(ctx)
    g = unfold_sums(f, ctx, numerals)
    return GroundStats(size(f), size(g), sum_depth(f), size_bound(f, ctx.n))
