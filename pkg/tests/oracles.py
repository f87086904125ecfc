"""Independent reference implementations used to freeze [DERIVED] values.

Nothing here imports the code it checks beyond the AST classes and the model
container, so agreement is evidence rather than a tautology.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

from causalsum.syntax import (
    Add, And, Box, Const, ConstSym, EAnd, EAtom, ENot, ETop, Eq, Geq, Mul, Neg, Not, Prob,
    RVar, RangeSym, Sum,
)


# --- models -----------------------------------------------------------------


def fixed_point(scm, u, alpha=None):
    """Unique assignment solving every structural equation at ``u``, found by
    scanning the whole product of ranges."""
    alpha = alpha or {}
    hits = []
    for vals in itertools.product(*(scm.ranges[v] for v in scm.variables)):
        a = dict(zip(scm.variables, vals))
        ok = True
        for v in scm.variables:
            if v in alpha:
                ok = a[v] == alpha[v]
            else:
                pv = tuple(a[p] for p in scm.parents[v])
                ok = scm.tables[v][(pv, u)] == a[v]
            if not ok:
                break
        if ok:
            hits.append(a)
    assert len(hits) == 1, f"{len(hits)} solutions at {u}"
    return hits[0]


def _sym(scm, s, iota):
    if isinstance(s, Const):
        return scm.constants[s.var][s.index]
    return iota[(s.var, s.index)]


def event_holds(scm, e, u, iota, alpha=None):
    if isinstance(e, ETop):
        return True
    if isinstance(e, EAtom):
        return fixed_point(scm, u, alpha)[e.var] == _sym(scm, e.value, iota)
    if isinstance(e, ENot):
        return not event_holds(scm, e.arg, u, iota, alpha)
    if isinstance(e, EAnd):
        return event_holds(scm, e.left, u, iota, alpha) and event_holds(scm, e.right, u, iota, alpha)
    if isinstance(e, Box):
        a = {}
        stack = [e.intervention]
        while stack:
            x = stack.pop()
            if isinstance(x, EAtom):
                a[x.var] = _sym(scm, x.value, iota)
            elif isinstance(x, EAnd):
                stack += [x.left, x.right]
        return event_holds(scm, e.body, u, iota, a)
    raise TypeError(e)


def probability(scm, e, iota=None):
    iota = iota or {}
    return sum((w for u, w in scm.exo if event_holds(scm, e, u, iota)), Fraction(0))


def term_value(scm, t, iota=None):
    """Term value as a Fraction, or None for an undefined conditional."""
    iota = iota or {}
    if isinstance(t, Prob):
        pc = probability(scm, t.cond, iota)
        if pc == 0:
            return None
        return probability(scm, EAnd(t.event, t.cond), iota) / pc
    if isinstance(t, (Add, Mul)):
        a, b = term_value(scm, t.left, iota), term_value(scm, t.right, iota)
        if a is None or b is None:
            return None
        return a + b if isinstance(t, Add) else a * b
    if isinstance(t, Neg):
        a = term_value(scm, t.arg, iota)
        return None if a is None else -a
    if isinstance(t, (ConstSym, RangeSym)):
        return Fraction(_sym(scm, t.sym, iota))
    if isinstance(t, Sum):
        total = Fraction(0)
        for val in scm.ranges[t.bound.var]:
            x = term_value(scm, t.body, {**iota, (t.bound.var, t.bound.index): val})
            if x is None:
                return None
            total += x
        return total
    raise TypeError(t)


def formula_holds(scm, f, iota=None):
    iota = iota or {}
    if isinstance(f, Geq):
        a, b = term_value(scm, f.left, iota), term_value(scm, f.right, iota)
        return a is not None and b is not None and a >= b
    if isinstance(f, Not):
        return not formula_holds(scm, f.arg, iota)
    if isinstance(f, And):
        return formula_holds(scm, f.left, iota) and formula_holds(scm, f.right, iota)
    if isinstance(f, Eq):
        return _sym(scm, f.left, iota) == _sym(scm, f.right, iota)
    raise TypeError(f)


def influences(scm):
    """Vi ⇝ Vj by brute force over every intervention pair differing at Vi."""
    out = set()
    vs = scm.variables
    for vi in vs:
        for vj in vs:
            if vi == vj:
                continue
            others = [v for v in vs if v not in (vi, vj)]
            for r in range(len(others) + 1):
                for sub in itertools.combinations(others, r):
                    for vals in itertools.product(*(scm.ranges[v] for v in sub)):
                        base = dict(zip(sub, vals))
                        for a, b in itertools.combinations(scm.ranges[vi], 2):
                            for u, w in scm.exo:
                                if w == 0:
                                    continue
                                ya = fixed_point(scm, u, {**base, vi: a})[vj]
                                yb = fixed_point(scm, u, {**base, vi: b})[vj]
                                if ya != yb:
                                    out.add((vi, vj))
    return out


# --- syntax -----------------------------------------------------------------


def free_occurrences(node, bound=frozenset()):
    """Free range variables by a scoped walk over every field."""
    if isinstance(node, RVar):
        return set() if node in bound else {node}
    if isinstance(node, Sum):
        return free_occurrences(node.body, bound | {node.bound})
    out = set()
    for name in getattr(node, "__slots__", ()):
        child = getattr(node, name)
        if isinstance(child, (tuple, list)):
            for c in child:
                out |= free_occurrences(c, bound)
        elif hasattr(child, "__slots__") or isinstance(child, RVar):
            out |= free_occurrences(child, bound)
    return out


def substitute_free(node, v, d, bound=frozenset()):
    """Replace free ``v`` by the constant ``d`` (no capture is possible)."""
    assert isinstance(d, Const)
    if isinstance(node, RVar):
        return d if node == v and node not in bound else node
    if isinstance(node, RangeSym):
        return ConstSym(d) if node.sym == v and v not in bound else node
    if isinstance(node, Sum):
        return Sum(node.bound, substitute_free(node.body, v, d, bound | {node.bound}))
    slots = getattr(node, "__slots__", ())
    if not slots or isinstance(node, Const):
        return node
    return type(node)(*(substitute_free(getattr(node, s), v, d, bound) for s in slots))


def range_assignments(node):
    """(var, index) of every free range variable, by a second independent scan."""
    return {(r.var, r.index) for r in free_occurrences(node)}


# --- numbers ----------------------------------------------------------------


def simplex_grid(n, D, strict=False):
    for d in range(1, D + 1):
        lo = 1 if strict else 0
        for ks in itertools.product(range(lo, d + 1), repeat=n):
            if sum(ks) == d:
                yield tuple(Fraction(k, d) for k in ks)


def box_grid(n, D, bound):
    vals = sorted({Fraction(k, d) for d in range(1, D + 1) for k in range(-bound * d, bound * d + 1)})
    return itertools.product(vals, repeat=n)


def etr_value(expr, point):
    """Direct evaluation of an ETR S-expression tuple."""
    if isinstance(expr, int):
        return Fraction(expr)
    if isinstance(expr, str):
        return point[int(expr[1:])]
    op, *args = expr
    vals = [etr_value(a, point) for a in args]
    return {
        "+": lambda: vals[0] + vals[1],
        "*": lambda: vals[0] * vals[1],
        "neg": lambda: -vals[0],
        "=": lambda: vals[0] == vals[1],
        "<=": lambda: vals[0] <= vals[1],
        "<": lambda: vals[0] < vals[1],
        "and": lambda: bool(vals[0]) and bool(vals[1]),
        "or": lambda: bool(vals[0]) or bool(vals[1]),
        "not": lambda: not vals[0],
    }[op]()


def and_gate_table(bits):
    return "".join(str(int(a) & int(b)) for a, b in zip(bits[::2], bits[1::2]))
