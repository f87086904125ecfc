"""Construction of the shipped corpus scripts.

The builder emits nodes with explicit Lin certificates so that checking the
corpus never needs the LP search.
"""
from __future__ import annotations

import itertools

from ..syntax import (
    Add, Const, EAnd, ETop, EAtom, Eq, Geq, Mul, Not, Prob, RVar, Sum, add_all, approx, conj, implies,
    iter_nodes, numeral, one, substitute_range_var, zero,
)
from .checker import (
    Axiom, Deduction, Hyp, Node, Proof, Rule, System, sumupper_family, sumupper_indices,
)
from .generators import conv_zero_phi, conv_zero_term
from .polybase import as_implies, lin_coefficients


class Builder:
    def __init__(self, system: System, hypotheses=()):
        self.system = system
        self.hyps = tuple(hypotheses)
        self.nodes = []
        self.notes = {}
        self.formulas = {}

    def add(self, f, just, note=None, label=None) -> str:
        label = label or f"s{len(self.nodes) + 1}"
        self.nodes.append(Node(label, f, just))
        self.formulas[label] = f
        if note:
            self.notes[label] = note
        return label

    def axiom(self, f, schema, note=None, args=None):
        return self.add(f, Axiom(schema, args), note)

    def taut(self, f, note=None):
        return self.axiom(f, "PolyBase:Taut", note)

    def lin(self, f, note=None):
        return self.axiom(f, "PolyBase:Lin", note, lin_coefficients(f))

    def hyp(self, k, note=None):
        return self.add(self.hyps[k - 1], Hyp(k), note)

    def mp(self, a, b, note=None):
        """From a: phi and b: phi -> psi conclude psi."""
        imp = as_implies(self.formulas[b])
        if imp is None or imp[0] != self.formulas[a]:
            raise ValueError(f"{b} is not an implication from {a}")
        return self.add(imp[1], Rule("MP", (a, b)), note)

    def mp_chain(self, lemma, *facts):
        """Discharge the curried antecedents of ``lemma`` by ``facts`` in order."""
        cur = lemma
        for f in facts:
            cur = self.mp(f, cur)
        return cur

    def rule(self, f, name, premises=(), generator=None, note=None):
        return self.add(f, Rule(name, tuple(premises), generator), note)

    def proof(self, goal=None, expect="verified", name="") -> Proof:
        goal = goal if goal is not None else self.nodes[-1].formula
        return Proof(list(self.nodes), self.hyps, goal, self.system, expect, name,
                     dict(self.notes))


def curried(antecedents, conclusion):
    out = conclusion
    for a in reversed(list(antecedents)):
        out = implies(a, out)
    return out


def distinct_formula(n: int, var: str = "X"):
    cs = [Const(var, i) for i in range(1, n + 1)]
    return conj([Not(Eq(a, b)) for a, b in itertools.combinations(cs, 2)])


def fin_formula(n: int, var: str = "X"):
    return approx(Sum(RVar(var, 1), Prob(ETop())), numeral(n))


# ---------------------------------------------------------------------------
# Fin_N => Distinct_N


def derive_distinct(b: Builder, n: int, var: str = "X") -> str:
    """Distinct_N inside AX_N: each c_i ~ c_j would squeeze the sum of P(true)
    down to N-1 via SumUpper, against Fin_N."""
    s = Sum(RVar(var, 1), Prob(ETop()))
    fin = b.axiom(approx(s, numeral(n)), "Fin_N", "the sum of P(true) is N")
    bound = Geq(numeral(n - 1), s)
    not_bound = b.lin(implies(approx(s, numeral(n)), Not(bound)))
    not_bound = b.mp(fin, not_bound)
    lits = []
    cs = [Const(var, i) for i in range(1, n + 1)]
    for ci, cj in itertools.combinations(cs, 2):
        phi = Eq(ci, cj)
        concl = implies(phi, bound)
        fam = sumupper_family(concl)
        prem = []
        for idx in sumupper_indices(n):
            f = fam(*idx)
            blocks = max(idx[1]) + 1
            if blocks <= n - 1:
                prem.append(b.lin(f, f"{blocks} blocks: the sum is at most {n - 1}"))
            else:
                prem.append(b.taut(f, "all blocks distinct contradicts the antecedent"))
        up = b.rule(concl, "SumUpper", prem, note=f"{ci} ~ {cj} bounds the sum by {n - 1}")
        contra = b.taut(curried([concl, Not(bound)], Not(phi)))
        lits.append(b.mp_chain(contra, up, not_bound))
    if len(lits) == 1:
        return lits[0]
    goal = distinct_formula(n, var)
    intro = b.taut(curried([b.formulas[x] for x in lits], goal), "conjunction introduction")
    return b.mp_chain(intro, *lits)


# ---------------------------------------------------------------------------
# Distinct_N => SumEquals_N


def derive_sum_equals(b: Builder, n: int, s: Sum, distinct: str) -> str:
    """sum x . t == t[x/c1] + ... + t[x/cN] from the distinctness node."""
    x = s.bound
    cs = [Const(x.var, i) for i in range(1, n + 1)]
    parts = [substitute_range_var(s.body, x, c) for c in cs]
    total = add_all(parts)
    dist = b.formulas[distinct]
    if n >= 2:
        lower = b.axiom(implies(dist, Geq(s, total)), "SumLower")
        lower = b.mp(distinct, lower)
    else:
        lower = b.axiom(Geq(s, total), "SumLower")
    upper_c = Geq(total, s)
    fam = sumupper_family(upper_c)
    prem = []
    for size, rgs in sumupper_indices(n):
        f = fam(size, rgs)
        if len(set(rgs)) < size:
            lem = b.taut(implies(dist, f), "a merged block contradicts distinctness")
            prem.append(b.mp(distinct, lem))
            continue
        missing = []
        for part in parts[size:]:
            for p in iter_nodes(part):
                if isinstance(p, Prob) and Geq(p, zero()) not in missing:
                    missing.append(Geq(p, zero()))
        nn = [b.axiom(m, "PolyBase:NonNeg") for m in missing]
        lem = b.lin(curried(missing, f), f"first {size} constants, the rest is nonnegative")
        prem.append(b.mp_chain(lem, *nn))
    upper = b.rule(upper_c, "SumUpper", prem)
    both = b.lin(curried([Geq(s, total), upper_c], approx(s, total)))
    return b.mp_chain(both, lower, upper)


# ---------------------------------------------------------------------------
# corpus


def _x(i=1):
    return RVar("X", i)


def _px(sym, extra=None):
    e = EAtom("X", sym)
    return Prob(EAnd(e, extra) if extra is not None else e)


def fin_to_distinct(n: int) -> Proof:
    b = Builder(System("AX_N", True, n))
    derive_distinct(b, n)
    return b.proof(distinct_formula(n), name=f"fin_to_distinct_{n}")


def distinct_to_sumequals(n: int) -> Proof:
    b = Builder(System("AX", True, n, ("Distinct_N",)))
    d = b.axiom(distinct_formula(n), "Distinct_N")
    s = Sum(_x(), _px(_x(), EAtom("Y", Const("Y", 1))))
    derive_sum_equals(b, n, s, d)
    return b.proof(name=f"distinct_to_sumequals_{n}")


def sumequals_to_fin(n: int) -> Proof:
    b = Builder(System("AX", True, n, ("SumEquals_N",)))
    f = approx(Sum(_x(), Prob(ETop())), numeral(n))
    b.axiom(f, "SumEquals_N", "with t = P(true) the unfolding is the numeral N")
    return b.proof(f, name=f"sumequals_to_fin_{n}")


def sum_eq_2() -> Proof:
    b = Builder(System("AX_N", True, 2))
    d = derive_distinct(b, 2)
    derive_sum_equals(b, 2, Sum(_x(), _px(_x())), d)
    return b.proof(name="sum_eq_2")


def sum_of_sums_2() -> Proof:
    b = Builder(System("AX_N", True, 2))
    d = derive_distinct(b, 2)
    t1 = _px(_x())
    t2 = _px(_x(), EAtom("Y", Const("Y", 2)))
    sums = [Sum(_x(), Add(t1, t2)), Sum(_x(), t1), Sum(_x(), t2)]
    eqs = [derive_sum_equals(b, 2, s, d) for s in sums]
    goal = approx(sums[0], Add(sums[1], sums[2]))
    lem = b.lin(curried([b.formulas[e] for e in eqs], goal), "unfoldings agree termwise")
    b.mp_chain(lem, *eqs)
    return b.proof(goal, name="sum_of_sums_2")


def _chain_formulas():
    from ..parser import parse_formula
    a = parse_formula("P(X=c1) >= P(X=c2)")
    bb = parse_formula("P(X=c1 & Y=c1) >= P(X=c2) * P(Y=c1)")
    c = parse_formula("P(Y=c1 | X=c1) > 0")
    return a, bb, c


def mp_chain() -> Proof:
    a, bb, c = _chain_formulas()
    b = Builder(System("AX", True), (a, implies(a, bb), implies(bb, c)))
    h1, h2, h3 = b.hyp(1), b.hyp(2), b.hyp(3)
    m = b.mp(h1, h2)
    b.mp(m, h3)
    return b.proof(c, name="mp_chain")


def deduction_pair() -> Proof:
    """Both directions: {A, A->B, B->C} |- C gives {A->B, B->C} |- A -> C by
    discharging A, and modus ponens recovers C from A and A -> C."""
    a, bb, c = _chain_formulas()
    b = Builder(System("AX", True), (a, implies(a, bb), implies(bb, c)))
    h1, h2, h3 = b.hyp(1), b.hyp(2), b.hyp(3)
    m = b.mp(b.mp(h1, h2), h3)
    d = b.add(implies(a, c), Deduction(m, 1), "discharge hypothesis 1")
    b.mp(h1, d, "and back")
    return b.proof(c, name="deduction_pair")


def _free_var_formulas():
    from ..parser import parse_formula
    phi = parse_formula("P(X=x1 & Y=y1) == P(X=x1) * P(Y=y1)")
    psi = parse_formula("P(X=x2 & Y=y2) == P(X=x2) * P(Y=y2)")
    return phi, psi


def _relabel(b: Builder):
    phi, psi = _free_var_formulas()
    x1, y1, x2, y2 = RVar("X", 1), RVar("Y", 1), RVar("X", 2), RVar("Y", 2)
    h = b.hyp(1)
    rows = []
    for i in (1, 2):
        ci = Const("X", i)
        ei = b.rule(substitute_range_var(phi, x1, ci), "FreeElim", [h])
        row = []
        for j in (1, 2):
            cj = Const("Y", j)
            row.append(b.rule(substitute_range_var(b.formulas[ei], y1, cj), "FreeElim", [ei]))
        rows.append(row)
    mids = []
    for i, row in zip((1, 2), rows):
        mids.append(b.rule(substitute_range_var(psi, x2, Const("X", i)), "FreeIntro", row))
    return b.rule(psi, "FreeIntro", mids, note="relabelled free variables")


def free_hypothesis() -> Proof:
    phi, psi = _free_var_formulas()
    b = Builder(System("AX_N", False, 2), (phi,))
    _relabel(b)
    return b.proof(psi, name="free_hypothesis")


def free_deduction_antipattern() -> Proof:
    phi, psi = _free_var_formulas()
    b = Builder(System("AX_N", False, 2), (phi,))
    last = _relabel(b)
    b.add(implies(phi, psi), Deduction(last, 1), "unsound: deduction across free variables")
    return b.proof(implies(phi, psi), expect="rejected", name="free_deduction_antipattern")


def conv_generator() -> Proof:
    b = Builder(System("AX", True))
    c = implies(conv_zero_phi(), Geq(zero(), conv_zero_term()))
    b.rule(c, "Conv", generator="conv_zero")
    return b.proof(expect="verified-bounded", name="conv_generator")


def conv_explicit(k: int = 50) -> Proof:
    b = Builder(System("AX", True))
    t = conv_zero_term()
    prem = [b.lin(implies(conv_zero_phi(), Geq(one(), Mul(t, numeral(n)))))
            for n in range(1, k + 1)]
    c = implies(conv_zero_phi(), Geq(zero(), t))
    b.rule(c, "Conv", prem)
    return b.proof(expect="rejected", name=f"conv_explicit_{k}")


CORPUS = {
    "fin_to_distinct_2": lambda: fin_to_distinct(2),
    "fin_to_distinct_3": lambda: fin_to_distinct(3),
    "distinct_to_sumequals_2": lambda: distinct_to_sumequals(2),
    "distinct_to_sumequals_3": lambda: distinct_to_sumequals(3),
    "sumequals_to_fin_2": lambda: sumequals_to_fin(2),
    "sumequals_to_fin_3": lambda: sumequals_to_fin(3),
    "sum_eq_2": sum_eq_2,
    "sum_of_sums_2": sum_of_sums_2,
    "mp_chain": mp_chain,
    "deduction_pair": deduction_pair,
    "free_hypothesis": free_hypothesis,
    "free_deduction_antipattern": free_deduction_antipattern,
    "conv_generator": conv_generator,
    "conv_explicit_50": conv_explicit,
}
