"""The pinned polynomial core: propositional tautologies, probability facts
and linear-combination certificates over polynomial atoms.

Every tag is sound over positive models when all conditions lie in L_cond,
which is the language the checker admits. Terms are read as polynomials whose
indeterminates are the probability terms and sums occurring in them;
``P(true | a)`` is 1 and ``P(false | a)`` is 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from ..syntax import (
    Add, And, Box, ConstSym, EAnd, EAtom, ENot, ETop, Eq, Geq, Mul, Neg, Not, Prob,
    RangeSym, Sum, show, zero,
)


class PolyBaseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomials over opaque atoms

Monomial = tuple  # sorted tuple of atom keys, with repetition


def _padd(a: dict, b: dict, k=1) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + k * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pmul(a: dict, b: dict) -> dict:
    out = {}
    for (ma, ca), (mb, cb) in itertools.product(a.items(), b.items()):
        m = tuple(sorted(ma + mb))
        v = out.get(m, 0) + ca * cb
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def term_poly(t) -> dict:
    """Polynomial of a core term as ``{monomial: Fraction}``."""
    if isinstance(t, Prob):
        if isinstance(t.event, ETop):
            return {(): Fraction(1)}
        if t.event == ENot(ETop()):
            return {}
        return {(show(t),): Fraction(1)}
    if isinstance(t, (Sum, ConstSym, RangeSym)):
        return {(show(t),): Fraction(1)}
    if isinstance(t, Add):
        return _padd(term_poly(t.left), term_poly(t.right))
    if isinstance(t, Neg):
        return _padd({}, term_poly(t.arg), -1)
    if isinstance(t, Mul):
        return _pmul(term_poly(t.left), term_poly(t.right))
    raise PolyBaseError(f"not a term: {t!r}")


@dataclass(frozen=True)
class Comparison:
    """``poly >= 0`` or, with ``strict``, ``poly > 0``."""

    poly: dict
    strict: bool


def comparison(f) -> Comparison | None:
    if isinstance(f, Geq):
        return Comparison(_padd(term_poly(f.left), term_poly(f.right), -1), False)
    if isinstance(f, Not) and isinstance(f.arg, Geq):
        g = f.arg
        return Comparison(_padd(term_poly(g.right), term_poly(g.left), -1), True)
    return None


# ---------------------------------------------------------------------------
# propositional structure


def _atoms(f, out: list):
    if isinstance(f, Not):
        _atoms(f.arg, out)
    elif isinstance(f, And):
        _atoms(f.left, out)
        _atoms(f.right, out)
    elif f not in out:
        out.append(f)


def _truth(f, val: dict) -> bool:
    if isinstance(f, Not):
        return not _truth(f.arg, val)
    if isinstance(f, And):
        return _truth(f.left, val) and _truth(f.right, val)
    return val[f]


MAX_TAUT_ATOMS = 20


def is_tautology(f) -> bool:
    """Truth-table check with comparisons and equalities as letters."""
    atoms = []
    _atoms(f, atoms)
    if len(atoms) > MAX_TAUT_ATOMS:
        raise PolyBaseError(f"{len(atoms)} atoms exceed the tautology cap {MAX_TAUT_ATOMS}")
    for bits in itertools.product((False, True), repeat=len(atoms)):
        if not _truth(f, dict(zip(atoms, bits))):
            return False
    return True


def _event_atoms(e, out: list):
    if isinstance(e, ENot):
        _event_atoms(e.arg, out)
    elif isinstance(e, EAnd):
        _event_atoms(e.left, out)
        _event_atoms(e.right, out)
    elif isinstance(e, (EAtom, Box)) and e not in out:
        out.append(e)


def _event_truth(e, val) -> bool:
    if isinstance(e, ETop):
        return True
    if isinstance(e, ENot):
        return not _event_truth(e.arg, val)
    if isinstance(e, EAnd):
        return _event_truth(e.left, val) and _event_truth(e.right, val)
    return val[e]


def events_equivalent(a, b) -> bool:
    """Propositional equivalence with atoms ``V=d`` and boxes as letters."""
    atoms = []
    _event_atoms(a, atoms)
    _event_atoms(b, atoms)
    if len(atoms) > MAX_TAUT_ATOMS:
        raise PolyBaseError("too many event atoms")
    for bits in itertools.product((False, True), repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if _event_truth(a, val) != _event_truth(b, val):
            return False
    return True


# ---------------------------------------------------------------------------
# shapes


def as_implies(f):
    if (isinstance(f, Not) and isinstance(f.arg, And) and isinstance(f.arg.right, Not)):
        return f.arg.left, f.arg.right.arg
    return None


def as_approx(f):
    if (isinstance(f, And) and isinstance(f.left, Geq) and isinstance(f.right, Geq)
            and f.left.left == f.right.right and f.left.right == f.right.left):
        return f.left.left, f.left.right
    return None


def split_hypotheses(f) -> tuple:
    """Peel ``a1 -> (a2 -> ... -> c)``; antecedent conjunctions are flattened."""
    hyps = []
    while True:
        imp = as_implies(f)
        if imp is None:
            return hyps, f
        a, f = imp
        hyps.extend(_flat(a))


def _flat(f) -> list:
    if isinstance(f, And):
        return _flat(f.left) + _flat(f.right)
    return [f]


# ---------------------------------------------------------------------------
# linear certificates


@dataclass(frozen=True)
class Certificate:
    multipliers: tuple  # one Fraction per usable hypothesis
    slack: Fraction


def _goals(c) -> list:
    """Comparisons to certify for a conclusion (conjunctions split)."""
    out = []
    for part in _flat(c):
        cmp = comparison(part)
        if cmp is None:
            raise PolyBaseError(f"conclusion part is not a comparison: {show(part)}")
        out.append(cmp)
    return out


def _verify(goal: Comparison, hyps: list, lam, mu) -> bool:
    if any(x < 0 for x in lam) or mu < 0:
        return False
    rest = dict(goal.poly)
    for h, x in zip(hyps, lam):
        if x:
            rest = _padd(rest, h.poly, -x)
    rest = _padd(rest, {(): mu}, -1) if mu else rest
    if rest:
        return False
    if goal.strict:
        return mu > 0 or any(x > 0 and h.strict for h, x in zip(hyps, lam))
    return True


def find_certificate(goal: Comparison, hyps: list) -> Certificate | None:
    """Exact LP: goal = sum lam_k hyp_k + mu with lam, mu >= 0."""
    from sympy import Rational
    from sympy.solvers.simplex import linprog

    monos = sorted({m for h in hyps for m in h.poly} | set(goal.poly), key=repr)
    monos = [m for m in monos if m != ()]
    k = len(hyps)
    # unknowns: lam_1..lam_k, mu
    a_eq, b_eq = [], []
    for m in monos:
        a_eq.append([Rational(h.poly.get(m, 0)) for h in hyps] + [0])
        b_eq.append(Rational(goal.poly.get(m, 0)))
    a_eq.append([Rational(h.poly.get((), 0)) for h in hyps] + [1])
    b_eq.append(Rational(goal.poly.get((), 0)))
    # minimise the total weight; a strict goal first maximises its strict part
    cap_row = [[Rational(1)] * (k + 1)]
    strict_w = [Rational(1) if h.strict else Rational(0) for h in hyps] + [Rational(1)]
    try:
        if goal.strict:
            best, _ = linprog([-w for w in strict_w], A=cap_row, b=[Rational(10**6)],
                              A_eq=a_eq, b_eq=b_eq)
            if -best <= 0:
                return None
            rows = cap_row + [[-w for w in strict_w]]
            _, sol = linprog([Rational(1)] * (k + 1), A=rows,
                             b=[Rational(10**6), best / 2], A_eq=a_eq, b_eq=b_eq)
        else:
            _, sol = linprog([Rational(1)] * (k + 1), A=cap_row, b=[Rational(10**6)],
                             A_eq=a_eq, b_eq=b_eq)
    except Exception:  # sympy raises InfeasibleLPError / UnboundedLPError
        return None
    lam = tuple(_frac(x) for x in sol[:k])
    mu = _frac(sol[k])
    if not _verify(goal, hyps, lam, mu):
        return None
    return Certificate(lam, mu)


def _frac(x) -> Fraction:
    from sympy import Rational
    r = Rational(x)
    return Fraction(int(r.p), int(r.q))


def check_lin(f, coeffs=None) -> str | None:
    """None if ``f`` is certified, else a reason.

    ``f`` is ``h1 -> (h2 -> ... -> c)`` (or ``h1 & h2 -> c``) with comparison
    hypotheses; equality atoms among the hypotheses count only through an
    outright contradiction ``d ~ d'`` with ``!(d ~ d')``. ``c`` is a comparison
    or a conjunction of comparisons. With explicit ``coeffs`` (one list per
    conclusion part: multipliers then slack) no search is done.
    """
    hyps, concl = split_hypotheses(f)
    eqs = [h for h in hyps if isinstance(h, Eq)]
    neqs = [h.arg for h in hyps if isinstance(h, Not) and isinstance(h.arg, Eq)]
    if any(e in neqs for e in eqs) or any(e.left == e.right for e in neqs):
        return None
    cmp_hyps = []
    for h in hyps:
        c = comparison(h)
        if c is not None:
            cmp_hyps.append(c)
    try:
        goals = _goals(concl)
    except PolyBaseError as exc:
        return str(exc)
    for i, g in enumerate(goals):
        if coeffs is not None:
            row = coeffs[i] if coeffs and isinstance(coeffs[0], (list, tuple)) else coeffs
            row = [Fraction(x) for x in row]
            if len(row) != len(cmp_hyps) + 1:
                return f"expected {len(cmp_hyps) + 1} coefficients, got {len(row)}"
            if not _verify(g, cmp_hyps, row[:-1], row[-1]):
                return "supplied coefficients do not certify the conclusion"
            continue
        # a contradiction among hypotheses also certifies anything
        if find_certificate(g, cmp_hyps) is None and \
                find_certificate(Comparison({}, True), cmp_hyps) is None:
            return "no nonnegative combination of the hypotheses yields the conclusion"
    return None


# ---------------------------------------------------------------------------
# tags


def check_nonneg(f) -> str | None:
    if isinstance(f, Geq) and isinstance(f.left, Prob) and f.right == zero():
        return None
    return "expected P(d | a) >= 0"


def check_add(f) -> str | None:
    """P(d & e | a) + P(d & !e | a) == P(d | a)."""
    ap = as_approx(f)
    if ap is None:
        return "expected an approximate equality"
    lhs, rhs = ap
    if not (isinstance(lhs, Add) and isinstance(lhs.left, Prob) and isinstance(lhs.right, Prob)
            and isinstance(rhs, Prob)):
        return "expected P(d & e | a) + P(d & !e | a) == P(d | a)"
    p1, p2 = lhs.left, lhs.right
    if not (p1.cond == p2.cond == rhs.cond):
        return "conditions differ"
    if not (isinstance(p1.event, EAnd) and isinstance(p2.event, EAnd)):
        return "summands must be conjunctions"
    d, e = p1.event.left, p1.event.right
    if p2.event != EAnd(d, ENot(e)) or rhs.event != d:
        return "summands do not split the right-hand event"
    return None


def check_dist(f) -> str | None:
    """P(d | a) == P(e | a) for propositionally equivalent d, e."""
    ap = as_approx(f)
    if ap is None or not all(isinstance(x, Prob) for x in ap):
        return "expected P(d | a) == P(e | a)"
    p, q = ap
    if p.cond != q.cond:
        return "conditions differ"
    if not events_equivalent(p.event, q.event):
        return "events are not propositionally equivalent"
    return None


def check_taut(f) -> str | None:
    return None if is_tautology(f) else "not a propositional tautology"


def check_polyeq(f) -> str | None:
    ap = as_approx(f)
    if ap is None:
        return "expected t == t'"
    if _padd(term_poly(ap[0]), term_poly(ap[1]), -1):
        return "sides differ as polynomials"
    return None


TAGS = {
    "Taut": check_taut,
    "PolyEq": check_polyeq,
    "NonNeg": check_nonneg,
    "Add": check_add,
    "Dist": check_dist,
    "Lin": check_lin,
}


def check_polybase(f, tag: str, args=None) -> str | None:
    fn = TAGS.get(tag)
    if fn is None:
        return f"unknown PolyBase tag {tag!r}"
    try:
        if tag == "Lin":
            return fn(f, args)
        return fn(f)
    except PolyBaseError as exc:
        return str(exc)


def lin_coefficients(f):
    """Explicit certificate rows for :func:`check_lin`, or None when the
    hypotheses are only refuted jointly (the checker then searches itself)."""
    hyps, concl = split_hypotheses(f)
    cmp_hyps = [c for c in map(comparison, hyps) if c is not None]
    rows = []
    for g in _goals(concl):
        cert = find_certificate(g, cmp_hyps)
        if cert is None:
            return None
        rows.append(tuple(cert.multipliers) + (cert.slack,))
    return tuple(rows) if len(rows) > 1 else rows[0]
