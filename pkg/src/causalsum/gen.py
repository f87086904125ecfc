"""Random formulas, sequents and models for property tests and experiments."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .scm import Scm
from .syntax import (
    Add, And, Box, Const, ConstSym, EAnd, EAtom, ENot, ETop, Eq, Geq, Mul, Neg, Not, Prob,
    RVar, RangeSym, Sequent, Sum, free_vars, numeral, zero,
)


@dataclass(frozen=True)
class GenConfig:
    variables: tuple = ("X", "Y")
    n: int = 2                 # constants per variable
    max_depth: int = 2         # term nesting
    max_sums: int = 2          # nested sums along a path
    causal: bool = True
    conditionals: bool = True
    coefficients: bool = True  # ConstSym / RangeSym / Neg allowed
    closed: bool = True
    numerals: bool = True


class FormulaGen:
    def __init__(self, rng: random.Random, cfg: GenConfig = GenConfig()):
        self.rng = rng
        self.cfg = cfg

    # symbols -------------------------------------------------------------

    def symbol(self, var, scope):
        opts = [Const(var, i) for i in range(1, self.cfg.n + 1)]
        opts += [r for r in scope if r.var == var]
        if not self.cfg.closed:
            opts.append(RVar(var, self.rng.randint(1, 2)))
        return self.rng.choice(opts)

    # events --------------------------------------------------------------

    def base_event(self, scope, depth=2):
        r = self.rng.random()
        if depth == 0 or r < 0.45:
            if self.rng.random() < 0.1:
                return ETop()
            var = self.rng.choice(self.cfg.variables)
            return EAtom(var, self.symbol(var, scope))
        if r < 0.65:
            return ENot(self.base_event(scope, depth - 1))
        return EAnd(self.base_event(scope, depth - 1), self.base_event(scope, depth - 1))

    def intervention(self, scope):
        vs = self.rng.sample(self.cfg.variables, self.rng.randint(1, len(self.cfg.variables)))
        e = None
        for v in vs:
            a = EAtom(v, self.symbol(v, scope))
            e = a if e is None else EAnd(e, a)
        return e

    def event(self, scope, depth=2):
        if not self.cfg.causal:
            return self.base_event(scope, depth)
        r = self.rng.random()
        if depth == 0 or r < 0.5:
            if self.rng.random() < 0.3:
                return self.base_event(scope, 1)
            return Box(self.intervention(scope), self.base_event(scope, 1))
        if r < 0.65:
            return ENot(self.event(scope, depth - 1))
        return EAnd(self.event(scope, depth - 1), self.event(scope, depth - 1))

    def cond_event(self, scope):
        """⊤ or a conjunction of literals over distinct variables."""
        vs = self.rng.sample(self.cfg.variables, self.rng.randint(1, len(self.cfg.variables)))
        e = None
        for v in vs:
            a = EAtom(v, self.symbol(v, scope))
            if self.rng.random() < 0.3:
                a = ENot(a)
            e = a if e is None else EAnd(e, a)
        return e

    # terms ---------------------------------------------------------------

    def term(self, scope=(), depth=None, sums=0):
        depth = self.cfg.max_depth if depth is None else depth
        r = self.rng.random()
        if depth == 0 or r < 0.35:
            return self.leaf(scope)
        if r < 0.55 and sums < self.cfg.max_sums:
            var = self.rng.choice(self.cfg.variables)
            bound = RVar(var, 1 + sum(1 for s in scope if s.var == var))
            return Sum(bound, self.term(tuple(scope) + (bound,), depth - 1, sums + 1))
        if r < 0.75:
            return Add(self.term(scope, depth - 1, sums), self.term(scope, depth - 1, sums))
        if r < 0.92:
            return Mul(self.term(scope, depth - 1, sums), self.term(scope, depth - 1, sums))
        if self.cfg.coefficients:
            return Neg(self.term(scope, depth - 1, sums))
        return self.leaf(scope)

    def leaf(self, scope):
        r = self.rng.random()
        if self.cfg.coefficients and r < 0.12:
            var = self.rng.choice(self.cfg.variables)
            s = self.symbol(var, scope)
            return RangeSym(s) if isinstance(s, RVar) else ConstSym(s)
        if self.cfg.numerals and r < 0.2:
            return numeral(self.rng.randint(0, 2))
        cond = ETop()
        if self.cfg.conditionals and self.rng.random() < 0.25:
            cond = self.cond_event(scope)
        return Prob(self.event(scope), cond)

    # formulas ------------------------------------------------------------

    def formula(self, depth=2, scope=()):
        r = self.rng.random()
        if depth == 0 or r < 0.5:
            if self.rng.random() < 0.12:
                var = self.rng.choice(self.cfg.variables)
                return Eq(self.symbol(var, scope), self.symbol(var, scope))
            return Geq(self.term(scope), self.term(scope))
        if r < 0.7:
            return Not(self.formula(depth - 1, scope))
        return And(self.formula(depth - 1, scope), self.formula(depth - 1, scope))

    def sequent(self, premises=None):
        k = self.rng.randint(0, 2) if premises is None else premises
        return Sequent(tuple(self.formula(1) for _ in range(k)), self.formula(2))


def random_formula(rng, cfg: GenConfig = GenConfig()):
    return FormulaGen(rng, cfg).formula()


def random_closed_formula(rng, cfg: GenConfig = GenConfig()):
    f = FormulaGen(rng, cfg).formula()
    assert not free_vars(f)
    return f


def tiny_sequent(rng, causal: bool, premises: int | None = None) -> Sequent:
    """Small sequents for the reduction-vs-oracle comparison: two binary
    variables, no coefficients, shallow terms."""
    cfg = GenConfig(("X", "Y"), 2, max_depth=1, max_sums=1, causal=causal,
                    conditionals=True, coefficients=False, closed=True, numerals=True)
    g = FormulaGen(rng, cfg)
    k = rng.randint(0, 1) if premises is None else premises
    prem = tuple(_small_comparison(g) for _ in range(k))
    concl = _small_comparison(g)
    if rng.random() < 0.4:
        concl = And(concl, _small_comparison(g))
    return Sequent(prem, concl)


def _small_comparison(g: FormulaGen):
    rng = g.rng
    left = g.leaf(())
    right = g.leaf(()) if rng.random() < 0.6 else zero()
    f = Geq(left, right)
    if rng.random() < 0.4:
        f = Not(f)
    return f


def m_n_model(rng: random.Random, variables, n: int, max_outcomes: int = 4,
              max_denominator: int = 12, positive: bool = False,
              permute_constants: bool = True, sizes: dict | None = None) -> Scm:
    """Model in the class with exactly ``n`` values per variable and pairwise
    distinct constants (a random bijection when ``permute_constants``).

    ``sizes`` overrides the range size per variable; constants c1..cn are then
    a surjection onto each range (so distinct constants may coincide).
    """
    order = list(variables)
    rng.shuffle(order)
    sizes = sizes or {}
    ranges = {v: tuple(range(1, sizes.get(v, n) + 1)) for v in order}
    parents = {v: tuple(p for p in order[:i] if rng.random() < 0.6) for i, v in enumerate(order)}
    outcomes = list(range(rng.randint(1, max_outcomes)))
    tables = {v: {} for v in order}
    for v in order:
        for pv in itertools.product(*(ranges[p] for p in parents[v])):
            for u in outcomes:
                tables[v][(pv, u)] = rng.choice(ranges[v])
    if positive:
        for cell in itertools.product(*(ranges[v] for v in order)):
            u = ("cell",) + cell
            outcomes.append(u)
            for i, v in enumerate(order):
                for pv in itertools.product(*(ranges[p] for p in parents[v])):
                    tables[v][(pv, u)] = cell[i]
    from .models import random_pmf
    weights = random_pmf(rng, len(outcomes), max(max_denominator, len(outcomes)))
    constants = {}
    for v in order:
        vals = list(ranges[v])
        if permute_constants:
            rng.shuffle(vals)
        if len(vals) < n:
            vals += [rng.choice(ranges[v]) for _ in range(n - len(vals))]
            rng.shuffle(vals)
        constants[v] = {i + 1: x for i, x in enumerate(vals)}
    return Scm(tuple(order), ranges, parents, tuple(zip(outcomes, weights)), tables, constants)


def fraction_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
