"""Term denotations, satisfaction and entailment over finite models.

Terms denote extended reals. A conditional probability with a null condition
is undefined (⊥), ⊥ absorbs every operation, and a comparison with an
undefined side is false. Validity in a model quantifies over every assignment
of the free range variables.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .scm import Scm, ScmError, WorldCache, padded_constants, validate, check_positivity
from .syntax import (
    Add, And, ConstSym, Eq, Geq, Mul, Neg, Not, Prob, RVar, RangeSym, Sequent, Sum,
    constants_in, free_vars, range_var_name, variables_in, FormulaError,
)


# ---------------------------------------------------------------------------
# extended reals


@dataclass(frozen=True, slots=True)
class ExtendedReal:
    kind: str  # "fin" | "inf" | "-inf" | "undef"
    value: Fraction | None = None

    @staticmethod
    def of(x) -> "ExtendedReal":
        return ExtendedReal("fin", Fraction(x))

    @property
    def is_undef(self) -> bool:
        return self.kind == "undef"

    def __str__(self):
        if self.kind == "fin":
            v = self.value
            return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return self.kind

    def to_json(self) -> str:
        if self.kind == "fin":
            return f"{self.value.numerator}/{self.value.denominator}"
        return self.kind

    def __add__(self, other):
        return ext_add(self, other)

    def __mul__(self, other):
        return ext_mul(self, other)

    def __neg__(self):
        return ext_neg(self)


INF = ExtendedReal("inf")
NINF = ExtendedReal("-inf")
UNDEF = ExtendedReal("undef")
ZERO = ExtendedReal.of(0)


def _sign(a: ExtendedReal) -> int:
    if a.kind == "inf":
        return 1
    if a.kind == "-inf":
        return -1
    return (a.value > 0) - (a.value < 0)


def ext_add(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    if a.kind == "undef" or b.kind == "undef":
        return UNDEF
    if a.kind == "fin" and b.kind == "fin":
        return ExtendedReal("fin", a.value + b.value)
    if a.kind == "fin":
        return b
    if b.kind == "fin":
        return a
    return a if a.kind == b.kind else ZERO


def ext_mul(a: ExtendedReal, b: ExtendedReal) -> ExtendedReal:
    if a.kind == "undef" or b.kind == "undef":
        return UNDEF
    if a.kind == "fin" and b.kind == "fin":
        return ExtendedReal("fin", a.value * b.value)
    s = _sign(a) * _sign(b)
    if s == 0:
        return ZERO
    return INF if s > 0 else NINF


def ext_neg(a: ExtendedReal) -> ExtendedReal:
    if a.kind == "fin":
        return ExtendedReal("fin", -a.value)
    return {"inf": NINF, "-inf": INF}.get(a.kind, UNDEF)


def ext_op(op: str, a: ExtendedReal, b: ExtendedReal | None = None) -> ExtendedReal:
    if op == "+":
        return ext_add(a, b)
    if op in ("*", "·"):
        return ext_mul(a, b)
    if op in ("neg", "-"):
        return ext_neg(a)
    raise ValueError(f"unknown operation {op!r}")


def ext_ge(a: ExtendedReal, b: ExtendedReal) -> bool:
    """a ≥ b, false whenever either side is undefined."""
    if a.kind == "undef" or b.kind == "undef":
        return False
    if a.kind == "fin" and b.kind == "fin":
        return a.value >= b.value
    rank = {"-inf": 0, "fin": 1, "inf": 2}
    return rank[a.kind] >= rank[b.kind]


# ---------------------------------------------------------------------------
# evaluation


class Evaluator:
    """Evaluates terms and formulas against one model, caching worlds."""

    def __init__(self, scm: Scm):
        self.scm = scm
        self.worlds = WorldCache(scm)

    def prob(self, event, iota=None) -> Fraction:
        return self.worlds.prob(event, iota)

    def term(self, t, iota: Mapping | None = None) -> ExtendedReal:
        iota = iota or {}
        if isinstance(t, Prob):
            w = self.worlds
            m_cond = w.mask(t.cond, iota)
            p_cond = w.mask_prob(m_cond)
            if p_cond == 0:
                return UNDEF
            p_joint = w.mask_prob(m_cond & w.mask(t.event, iota))
            return ExtendedReal("fin", p_joint / p_cond)
        if isinstance(t, Add):
            return ext_add(self.term(t.left, iota), self.term(t.right, iota))
        if isinstance(t, Mul):
            left = self.term(t.left, iota)
            if left.kind == "undef":
                return UNDEF
            return ext_mul(left, self.term(t.right, iota))
        if isinstance(t, Neg):
            return ext_neg(self.term(t.arg, iota))
        if isinstance(t, (ConstSym, RangeSym)):
            return ExtendedReal("fin", Fraction(self._symbol(t.sym, iota)))
        if isinstance(t, Sum):
            b = t.bound
            key = (b.var, b.index)
            total = ZERO
            if b.var not in self.scm.ranges:
                raise ScmError(f"unknown variable {b.var}")
            inner = dict(iota)
            for n in self.scm.ranges[b.var]:
                inner[key] = n
                total = ext_add(total, self.term(t.body, inner))
                if total.kind == "undef":
                    return UNDEF
            return total
        raise FormulaError(f"not a term: {t!r}")

    def _symbol(self, sym, iota) -> int:
        from .scm import symbol_value
        return symbol_value(self.scm, sym, iota)

    def sat(self, f, iota: Mapping | None = None) -> bool:
        iota = iota or {}
        if isinstance(f, Geq):
            return ext_ge(self.term(f.left, iota), self.term(f.right, iota))
        if isinstance(f, And):
            return self.sat(f.left, iota) and self.sat(f.right, iota)
        if isinstance(f, Not):
            return not self.sat(f.arg, iota)
        if isinstance(f, Eq):
            return self._symbol(f.left, iota) == self._symbol(f.right, iota)
        raise FormulaError(f"not a formula: {f!r}")

    def assignments(self, fvars) -> Iterator[dict]:
        """All total assignments of ``fvars``, lexicographic by (variable
        position, index, value)."""
        pos = {v: i for i, v in enumerate(self.scm.variables)}
        for rv in fvars:
            if rv.var not in pos:
                raise ScmError(f"model has no variable {rv.var}")
        keys = sorted(fvars, key=lambda r: (pos[r.var], r.index))
        for vals in itertools.product(*(self.scm.ranges[k.var] for k in keys)):
            yield {(k.var, k.index): v for k, v in zip(keys, vals)}

    def falsifying(self, f) -> dict | None:
        """First assignment under which ``f`` fails, or None if valid."""
        for iota in self.assignments(free_vars(f)):
            if not self.sat(f, iota):
                return iota
        return None

    def valid(self, f) -> bool:
        return self.falsifying(f) is None

    def sequent(self, seq: Sequent) -> bool:
        return any(not self.valid(g) for g in seq.premises) or self.valid(seq.conclusion)


def eval_term(scm: Scm, iota: Mapping | None, t) -> ExtendedReal:
    _check_covered(iota, free_vars(t))
    return Evaluator(scm).term(t, iota)


def satisfies(scm: Scm, iota: Mapping | None, f) -> bool:
    _check_covered(iota, free_vars(f))
    return Evaluator(scm).sat(f, iota)


def valid_in_model(scm: Scm, f) -> bool:
    return Evaluator(scm).valid(f)


def satisfies_sequent(scm: Scm, seq: Sequent) -> bool:
    return Evaluator(scm).sequent(seq)


def _check_covered(iota, fvars):
    iota = iota or {}
    missing = [rv for rv in fvars if (rv.var, rv.index) not in iota]
    if missing:
        raise ScmError(f"assignment does not cover {', '.join(map(str, missing))}")


def trace_records(scm: Scm, t, iotas) -> Iterator[dict]:
    """JSON-ready evaluation log entries (term, assignment, value)."""
    ev = Evaluator(scm)
    for iota in iotas:
        yield {
            "term": str(t),
            "assignment": {range_var_name(v, i): val for (v, i), val in sorted(iota.items())},
            "value": ev.term(t, iota).to_json(),
        }


# ---------------------------------------------------------------------------
# countermodel search


@dataclass(frozen=True)
class SearchBudget:
    """Model-space parameters for :func:`find_countermodel`."""

    max_range: int = 3
    max_denominator: int = 12
    lattice_models: int = 20000
    random_models: int = 2000
    max_outcomes: int = 6
    positive: bool = False
    causal: bool | None = None  # None: decide from the sequent
    seed: int = 0


@dataclass(frozen=True)
class Countermodel:
    scm: Scm
    assignment: dict


def compositions(total: int, parts: int) -> Iterator[tuple]:
    """Ordered tuples of ``parts`` non-negative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def observational_model(variables, ranges, weights, n_constants: int) -> Scm:
    """Model whose exogenous outcomes are the cells of the joint table."""
    cells = list(itertools.product(*(ranges[v] for v in variables)))
    exo = tuple((cell, w) for cell, w in zip(cells, weights) if w != 0)
    parents = {v: () for v in variables}
    tables = {v: {((), cell): cell[i] for cell, _ in exo} for i, v in enumerate(variables)}
    return Scm(tuple(variables), ranges, parents, exo, tables,
               padded_constants(ranges, n_constants))


def lattice_models(variables, budget: SearchBudget, n_constants: int) -> Iterator[Scm]:
    """Observational models with every joint pmf of denominator <= D over range
    sizes up to ``max_range``; smallest instances first."""
    count = 0
    lo = 2 if n_constants >= 2 else 1
    sizes = sorted(itertools.product(range(lo, budget.max_range + 1), repeat=len(variables)),
                   key=lambda s: (sum(s), s))
    seen = set()
    for d in range(1, budget.max_denominator + 1):
        for shape in sizes:
            if max(shape, default=1) > n_constants:
                continue
            ranges = {v: tuple(range(1, k + 1)) for v, k in zip(variables, shape)}
            n_cells = 1
            for k in shape:
                n_cells *= k
            for comp in compositions(d, n_cells):
                if budget.positive and 0 in comp:
                    continue
                w = tuple(Fraction(c, d) for c in comp)
                key = (shape, w)
                if key in seen:
                    continue
                seen.add(key)
                yield observational_model(variables, ranges, w, n_constants)
                count += 1
                if count >= budget.lattice_models:
                    return


def random_scm(rng: random.Random, variables, max_range: int = 3, max_outcomes: int = 6,
               max_denominator: int = 12, positive: bool = False, n_constants: int | None = None,
               min_range: int = 2, edge_prob: float = 0.6) -> Scm:
    """Random recursive model: a random order, random parents among earlier
    variables, random tables and a random pmf. With ``positive`` the observational
    joint is made strictly positive by adding one outcome per cell that reads
    the cell off directly (a mixture with an observational model)."""
    order = list(variables)
    rng.shuffle(order)
    n_constants = n_constants or max_range
    ranges = {v: tuple(range(1, rng.randint(min_range, min(max_range, n_constants)) + 1))
              for v in order}
    parents = {v: tuple(p for p in order[:i] if rng.random() < edge_prob)
               for i, v in enumerate(order)}
    n_u = rng.randint(1, max_outcomes)
    outcomes = [("r", k) for k in range(n_u)]
    tables = {v: {} for v in order}
    for v in order:
        for pv in itertools.product(*(ranges[p] for p in parents[v])):
            for u in outcomes:
                tables[v][(pv, u)] = rng.choice(ranges[v])
    if positive:
        cells = list(itertools.product(*(ranges[v] for v in order)))
        for cell in cells:
            u = ("cell", cell)
            outcomes.append(u)
            for i, v in enumerate(order):
                for pv in itertools.product(*(ranges[p] for p in parents[v])):
                    tables[v][(pv, u)] = cell[i]
    d = rng.randint(len(outcomes), max(len(outcomes), max_denominator))
    cuts = sorted(rng.sample(range(1, d), len(outcomes) - 1)) if len(outcomes) > 1 else []
    pts = [0] + cuts + [d]
    weights = [Fraction(pts[i + 1] - pts[i], d) for i in range(len(outcomes))]
    exo = tuple(zip(outcomes, weights))
    return Scm(tuple(order), ranges, parents, exo, tables, padded_constants(ranges, n_constants))


def find_countermodel(seq: Sequent, budget: SearchBudget = SearchBudget(),
                      candidates: Iterable[Scm] | None = None) -> Countermodel | None:
    """A model where every premise is valid and the conclusion fails.

    Without explicit ``candidates`` the search runs over the observational
    lattice and then over random recursive models (the latter matter only when
    the sequent mentions interventions).
    """
    if candidates is None:
        candidates = default_candidates(seq, budget)
    for scm in candidates:
        if budget.positive and not check_positivity(scm):
            continue
        ev = Evaluator(scm)
        try:
            if not all(ev.valid(g) for g in seq.premises):
                continue
            bad = ev.falsifying(seq.conclusion)
        except ScmError:
            continue
        if bad is not None:
            if not validate(scm).ok:
                continue
            return Countermodel(scm, bad)
    return None


def default_candidates(seq: Sequent, budget: SearchBudget) -> Iterator[Scm]:
    variables = sorted(variables_in(seq))
    n_const = max([c.index for c in constants_in(seq)] + [budget.max_range, 1])
    causal = budget.causal
    if causal is None:
        from .syntax import interventions_in
        causal = bool(interventions_in(seq))
    yield from lattice_models(variables, budget, n_const)
    if causal:
        rng = random.Random(budget.seed)
        for _ in range(budget.random_models):
            yield random_scm(rng, variables, budget.max_range, budget.max_outcomes,
                             budget.max_denominator, budget.positive, n_const)
