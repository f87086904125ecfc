"""Recognizers for the axiom schemas.

Each recognizer returns None on acceptance and a reason string otherwise.
Instances may contain free range variables; the checker decides whether the
system admits them.
"""
from __future__ import annotations

import dataclasses
import itertools

from ..syntax import (
    And, Const, ConstSym, EAnd, EAtom, ETop, Eq, FormulaError, Geq, Mul, Neg, Not, Prob,
    RVar, RangeSym, Sum, add_all, approx, conj, constants_in, gt, iff, implies,
    is_cond_formula, iter_nodes, numeral, show, substitute_range_var, zero,
)
from .polybase import as_approx, as_implies, check_polybase

SCHEMAS = ("EqReflex", "EqReplace", "EqDist", "Cond", "SumLower", "Pos",
           "Fin_N", "Distinct_N", "SumEquals_N")


def _is_symbol(s) -> bool:
    return isinstance(s, (Const, RVar))


def eq_reflex(f, n=None, args=()):
    if isinstance(f, Eq) and f.left == f.right:
        return None
    return "expected c ~ c"


# --- EqReplace -------------------------------------------------------------


class _Mismatch(Exception):
    pass


def _abstract(a, b, c, c2, v):
    """The formula phi with phi[v/c] = a and phi[v/c2] = b, built by walking
    both sides in parallel and abstracting the positions where they differ."""
    if a == b:
        return a
    if _is_symbol(a) and _is_symbol(b):
        if a == c and b == c2:
            return v
        raise _Mismatch(f"{show(a)} vs {show(b)}")
    if isinstance(a, (ConstSym, RangeSym)) and isinstance(b, (ConstSym, RangeSym)):
        if a.sym == c and b.sym == c2:
            return RangeSym(v)
        raise _Mismatch(f"{show(a)} vs {show(b)}")
    if type(a) is not type(b) or not dataclasses.is_dataclass(a):
        raise _Mismatch(f"{show(a)} vs {show(b)}")
    kids = {}
    for fld in dataclasses.fields(a):
        x, y = getattr(a, fld.name), getattr(b, fld.name)
        if isinstance(x, str):
            if x != y:
                raise _Mismatch(f"{x} vs {y}")
            kids[fld.name] = x
        else:
            kids[fld.name] = _abstract(x, y, c, c2, v)
    return type(a)(**kids)


_CANON = 10_000


def canonical(node, depth=0):
    """Alpha-normal form: the bound variable of a sum at nesting depth d is
    renamed to index 10000 + d."""
    if isinstance(node, Sum):
        b = RVar(node.bound.var, _CANON + depth)
        body = substitute_range_var(node.body, node.bound, b) if b != node.bound else node.body
        return Sum(b, canonical(body, depth + 1))
    if not dataclasses.is_dataclass(node) or isinstance(node, (Const, RVar)):
        return node
    kids = {}
    for fld in dataclasses.fields(node):
        x = getattr(node, fld.name)
        kids[fld.name] = x if isinstance(x, str) else canonical(x, depth)
    return type(node)(**kids)


def eq_replace(f, n=None, args=()):
    outer = as_implies(f)
    if outer is None or not isinstance(outer[0], Eq):
        return "expected c ~ c' -> (phi[v/c] -> phi[v/c'])"
    inner = as_implies(outer[1])
    if inner is None:
        return "consequent is not an implication"
    c, c2 = outer[0].left, outer[0].right
    a, b = canonical(inner[0]), canonical(inner[1])
    used = [r.index for r in iter_nodes(f) if isinstance(r, RVar) and r.var == c.var]
    v = RVar(c.var, max(used, default=0) + 1)
    try:
        phi = _abstract(a, b, c, c2, v)
    except (_Mismatch, FormulaError) as exc:
        return f"the two sides differ outside the replaced symbol: {exc}"
    if (canonical(substitute_range_var(phi, v, c)) != a
            or canonical(substitute_range_var(phi, v, c2)) != b):
        return "replacement is not a substitution instance (variable capture)"
    return None


# --- probabilistic schemas ---------------------------------------------------


def eq_dist(f, n=None, args=()):
    imp = as_implies(f)
    if imp is None or not (isinstance(imp[0], Not) and isinstance(imp[0].arg, Eq)):
        return "expected !(c ~ c') -> P(V=c & V=c') == 0"
    c, c2 = imp[0].arg.left, imp[0].arg.right
    want = approx(Prob(EAnd(EAtom(c.var, c), EAtom(c.var, c2)), ETop()), zero())
    if imp[1] != want:
        return "consequent is not P(V=c & V=c') == 0 for the same constants"
    return None


def cond(f, n=None, args=()):
    if not (isinstance(f, And) and as_implies(f.left)):
        return "expected P(d | d') >= t <-> P(d & d') >= t * P(d')"
    lhs, rhs = as_implies(f.left)
    if not (isinstance(lhs, Geq) and isinstance(lhs.left, Prob)):
        return "left side is not P(d | d') >= t"
    p, t = lhs.left, lhs.right
    if not is_cond_formula(p.cond):
        return "condition is not in L_cond"
    want = iff(lhs, Geq(Prob(EAnd(p.event, p.cond), ETop()), Mul(t, Prob(p.cond, ETop()))))
    if f != want:
        return "right side is not P(d & d') >= t * P(d')"
    return None


def _sumlower_expected(s, t, S, ordered):
    parts = [substitute_range_var(t, s.bound, c) for c in S]
    body = Geq(s, add_all(parts))
    if len(S) <= 1:
        return body
    pairs = (itertools.permutations(S, 2) if ordered else itertools.combinations(S, 2))
    return implies(conj([Not(Eq(a, b)) for a, b in pairs]), body)


def sum_lower(f, n=None, args=()):
    imp = as_implies(f)
    body = imp[1] if imp else f
    if not (isinstance(body, Geq) and isinstance(body.left, Sum)):
        return "expected sum v . t >= t[v/c1] + ... with distinctness antecedent"
    s = body.left
    if any(isinstance(x, Neg) for x in iter_nodes(s.body)):
        return "summand must be negation-free (the bound needs t >= 0)"
    if imp is None:
        cands = [[]] + [[c] for c in sorted(constants_in(f)) if c.var == s.bound.var]
        cands.append([Const(s.bound.var, 1)])
        for S in cands:
            if _sumlower_expected(s, s.body, S, False) == f:
                return None
        return "bare SumLower must bound the sum by at most one instance"
    lits = _conj_list(imp[0])
    if not all(isinstance(x, Not) and isinstance(x.arg, Eq) for x in lits):
        return "antecedent must be a conjunction of inequalities"
    for ordered in (False, True):
        k = _set_size(len(lits), ordered)
        if k is None:
            continue
        S = [lits[0].arg.left] + [x.arg.right for x in lits[:k - 1]]
        if any(not isinstance(c, Const) or c.var != s.bound.var for c in S):
            return "S must consist of constants of the summed variable"
        if len(set(S)) != len(S):
            continue
        if _sumlower_expected(s, s.body, S, ordered) == f:
            return None
    return "antecedent does not state pairwise distinctness of S, or the bound does not match S"


def _set_size(pairs, ordered):
    for k in range(2, 64):
        m = k * (k - 1) if ordered else k * (k - 1) // 2
        if m == pairs:
            return k
        if m > pairs:
            return None
    return None


def _conj_list(f):
    if isinstance(f, And) and as_approx(f) is None:
        return _conj_list(f.left) + _conj_list(f.right)
    return [f]


def pos(f, n=None, args=()):
    if not (isinstance(f, And) and isinstance(f.left, Geq) and isinstance(f.left.left, Prob)):
        return "expected P(a) > 0"
    p = f.left.left
    if f != gt(p, zero()) or not isinstance(p.cond, ETop):
        return "expected P(a) > 0"
    if not is_cond_formula(p.event):
        return "event is not in L_cond"
    return None


def fin_n(f, n=None, args=()):
    if n is None:
        return "Fin_N needs a bounded signature"
    ap = as_approx(f)
    if ap is None or not isinstance(ap[0], Sum):
        return "expected sum v . P(true) == N"
    if ap[0].body != Prob(ETop(), ETop()):
        return "summand must be P(true)"
    if ap[1] != numeral(n):
        return f"right side must be the numeral {n}"
    return None


def distinct_n(f, n=None, args=()):
    if n is None:
        return "Distinct_N needs a bounded signature"
    lits = _conj_list(f)
    if not lits or not (isinstance(lits[0], Not) and isinstance(lits[0].arg, Eq)):
        return "expected a conjunction of inequalities"
    var = lits[0].arg.left.var
    cs = [Const(var, i) for i in range(1, n + 1)]
    for pairs in (itertools.combinations(cs, 2), itertools.permutations(cs, 2)):
        if conj([Not(Eq(a, b)) for a, b in pairs]) == f:
            return None
    return f"not the pairwise distinctness of c1..c{n}"


def sum_equals_n(f, n=None, args=()):
    if n is None:
        return "SumEquals_N needs a bounded signature"
    ap = as_approx(f)
    if ap is None or not isinstance(ap[0], Sum):
        return "expected sum v . t == t[v/c1] + ... + t[v/cN]"
    s = ap[0]
    want = add_all([substitute_range_var(s.body, s.bound, Const(s.bound.var, i))
                    for i in range(1, n + 1)])
    if ap[1] != want:
        return "right side is not the unfolding over c1..cN"
    return None


RECOGNIZERS = {
    "EqReflex": eq_reflex,
    "EqReplace": eq_replace,
    "EqDist": eq_dist,
    "Cond": cond,
    "SumLower": sum_lower,
    "Pos": pos,
    "Fin_N": fin_n,
    "Distinct_N": distinct_n,
    "SumEquals_N": sum_equals_n,
}


def check_axiom_instance(f, schema: str, n: int | None = None, args=None) -> str | None:
    """None if ``f`` is an instance of ``schema`` (``PolyBase:<tag>`` for the
    polynomial core), else the reason for rejection."""
    if schema.startswith("PolyBase:"):
        return check_polybase(f, schema.split(":", 1)[1], args)
    fn = RECOGNIZERS.get(schema)
    if fn is None:
        return f"unknown axiom schema {schema!r}"
    try:
        return fn(f, n, args or ())
    except FormulaError as exc:
        return str(exc)


def matching_schemas(f, n=None) -> list:
    return [s for s in SCHEMAS if check_axiom_instance(f, s, n) is None]
