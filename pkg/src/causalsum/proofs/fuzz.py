"""Soundness fuzzing: random schema instances and rule applications checked
for validity in random positive models of the matching class.

Model classes:
  ``M+``    ranges of size 2 or 3, three constants per variable mapped
            surjectively (so distinct constants may name the same value)
  ``M_N+``  exactly N values, constants c1..cN a bijection
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from ..gen import FormulaGen, GenConfig, m_n_model
from ..semantics import Evaluator
from ..syntax import (
    Add, And, Const, EAnd, EAtom, ENot, ETop, Eq, Geq, Mul, Neg, Not, Prob, RVar, Sum,
    add_all, approx, conj, e_or, gt, iff, implies, iter_nodes, numeral, one, rename_constants,
    show, substitute_range_var, zero,
)
from .checker import conv_family, sumupper_family, sumupper_indices
from .schemas import check_axiom_instance

VARIABLES = ("X", "Y")
K_CONSTANTS = 3


@dataclass(frozen=True)
class FuzzConfig:
    trials: int = 1000
    n: int = 2                # N for the bounded class
    models_per_class: int = 40
    seed: int = 0


@dataclass
class Violation:
    schema: str
    formula: str
    model: object

    def show(self) -> str:
        return f"{self.schema}: {self.formula} fails in a model over {self.model.variables}"


@dataclass
class SchemaReport:
    schema: str
    model_class: str
    trials: int = 0
    violations: list = field(default_factory=list)
    not_recognized: int = 0  # generated instances the recognizer refused

    @property
    def ok(self) -> bool:
        return not self.violations and not self.not_recognized


# ---------------------------------------------------------------------------
# models


class ModelPool:
    def __init__(self, rng: random.Random, cfg: FuzzConfig):
        self.rng = rng
        self.cfg = cfg
        self._pools = {}

    def pool(self, model_class: str) -> list:
        if model_class not in self._pools:
            self._pools[model_class] = [self._make(model_class)
                                        for _ in range(self.cfg.models_per_class)]
        return self._pools[model_class]

    def _make(self, model_class):
        rng = self.rng
        if model_class == "M_N+":
            scm = m_n_model(rng, VARIABLES, self.cfg.n, positive=True)
        elif model_class == "M+":
            sizes = {v: rng.choice((2, 3)) for v in VARIABLES}
            scm = m_n_model(rng, VARIABLES, K_CONSTANTS, positive=True, sizes=sizes)
        else:
            raise ValueError(f"unknown model class {model_class!r}")
        return Evaluator(scm)

    def pick(self, model_class):
        return self.rng.choice(self.pool(model_class))


# ---------------------------------------------------------------------------
# instance generators


class Instances:
    """Random instances of each schema (and of the mutated schemas)."""

    def __init__(self, rng: random.Random, n_constants: int):
        self.rng = rng
        self.k = n_constants
        cfg = GenConfig(VARIABLES, n_constants, max_depth=2, max_sums=1, causal=False,
                        conditionals=True, coefficients=False, closed=False, numerals=True)
        self.g = FormulaGen(rng, cfg)

    def var(self):
        return self.rng.choice(VARIABLES)

    def const(self, var):
        return Const(var, self.rng.randint(1, self.k))

    def symbol(self, var):
        if self.rng.random() < 0.3:
            return RVar(var, self.rng.randint(1, 2))
        return self.const(var)

    def term(self, scope=()):
        return self.g.term(scope)

    def formula(self):
        return self.g.formula(1)

    def posterm(self, v):
        """Negation-free term mentioning ``v``."""
        t = self.g.term((v,), 1)
        if any(isinstance(x, Neg) for x in iter_nodes(t)):
            t = Prob(EAtom(v.var, v))
        return t

    # schemas ----------------------------------------------------------------

    def EqReflex(self):
        s = self.symbol(self.var())
        return Eq(s, s)

    def EqReplace(self):
        var = self.var()
        v = RVar(var, 3)
        phi = self.formula()
        # plant v in a random atom position
        phi = _plant(phi, var, v, self.rng)
        c, c2 = self.symbol(var), self.symbol(var)
        return implies(Eq(c, c2), implies(substitute_range_var(phi, v, c),
                                          substitute_range_var(phi, v, c2)))

    def EqDist(self):
        var = self.var()
        c, c2 = self.symbol(var), self.symbol(var)
        return implies(Not(Eq(c, c2)),
                       approx(Prob(EAnd(EAtom(var, c), EAtom(var, c2))), zero()))

    def Cond(self):
        d = self.g.base_event(())
        d2 = self.g.cond_event(())
        t = self.term()
        return iff(Geq(Prob(d, d2), t), Geq(Prob(EAnd(d, d2)), Mul(t, Prob(d2))))

    def SumLower(self):
        var = self.var()
        v = RVar(var, 1)
        t = self.posterm(v)
        size = self.rng.randint(0, self.k)
        S = self.rng.sample([Const(var, i) for i in range(1, self.k + 1)], size)
        body = Geq(Sum(v, t), add_all([substitute_range_var(t, v, c) for c in S]))
        if size <= 1:
            return body
        return implies(conj([Not(Eq(a, b)) for a, b in itertools.combinations(S, 2)]), body)

    def Pos(self):
        return gt(Prob(self.g.cond_event(())), zero())

    def Fin_N(self):
        return approx(Sum(RVar(self.var(), 1), one()), numeral(self.k))

    def Distinct_N(self):
        var = self.var()
        cs = [Const(var, i) for i in range(1, self.k + 1)]
        return conj([Not(Eq(a, b)) for a, b in itertools.combinations(cs, 2)])

    def SumEquals_N(self):
        var = self.var()
        v = RVar(var, 1)
        t = self.g.term((v,), 2)
        parts = [substitute_range_var(t, v, Const(var, i)) for i in range(1, self.k + 1)]
        return approx(Sum(v, t), add_all(parts))

    def NonNeg(self):
        return Geq(Prob(self.g.base_event(()), self.g.cond_event(())), zero())

    def Add(self):
        d, e = self.g.base_event(()), self.g.base_event(())
        a = self.g.cond_event(())
        return approx(Add(Prob(EAnd(d, e), a), Prob(EAnd(d, ENot(e)), a)), Prob(d, a))

    def Dist(self):
        d, e = self.g.base_event(()), self.g.base_event(())
        a = self.g.cond_event(())
        forms = [(EAnd(d, e), EAnd(e, d)), (ENot(ENot(d)), d),
                 (e_or(d, e), ENot(EAnd(ENot(e), ENot(d)))),
                 (EAnd(d, ETop()), d)]
        x, y = self.rng.choice(forms)
        return approx(Prob(x, a), Prob(y, a))

    def Taut(self):
        p, q, r = self.formula(), self.formula(), self.formula()
        forms = [implies(p, implies(q, p)),
                 implies(implies(p, implies(q, r)), implies(implies(p, q), implies(p, r))),
                 implies(And(p, q), p),
                 implies(Not(Not(p)), p),
                 implies(implies(Not(p), Not(q)), implies(q, p))]
        return self.rng.choice(forms)

    def Lin(self):
        """p >= 0 -> q >= 0 -> a p + b q + c >= 0 with random a, b, c >= 0."""
        p, q = self.term(), self.term()
        a, b, c = (self.rng.randint(0, 2) for _ in range(3))
        goal = add_all([Mul(numeral(a), p), Mul(numeral(b), q), numeral(c)])
        return implies(Geq(p, zero()), implies(Geq(q, zero()), Geq(goal, zero())))

    # mutations -----------------------------------------------------------------

    def mut_EqDist_eq(self):
        var = self.var()
        c, c2 = self.symbol(var), self.symbol(var)
        return implies(Eq(c, c2), approx(Prob(EAnd(EAtom(var, c), EAtom(var, c2))), zero()))

    def mut_Cond_drop(self):
        d = self.g.base_event(())
        d2 = self.g.cond_event(())
        t = self.term()
        return iff(Geq(Prob(d, d2), t), Geq(Prob(EAnd(d, d2)), t))

    def mut_SumLower_bare(self):
        var = self.var()
        v = RVar(var, 1)
        t = Prob(EAtom(var, v))
        S = [Const(var, i) for i in range(1, self.k + 1)]
        return Geq(Sum(v, t), add_all([substitute_range_var(t, v, c) for c in S]))

    def mut_Fin_plus(self):
        return approx(Sum(RVar(self.var(), 1), one()), numeral(self.k + 1))

    def mut_Pos_flip(self):
        return gt(zero(), Prob(self.g.cond_event(())))

    def mut_Pos_noncond(self):
        var = self.var()
        a = EAtom(var, self.const(var))
        return gt(Prob(EAnd(a, ENot(a))), zero())

    def mut_EqReflex_distinct(self):
        var = self.var()
        return Eq(Const(var, 1), Const(var, 2))

    def mut_SumEquals_short(self):
        var = self.var()
        v = RVar(var, 1)
        t = Prob(EAtom(var, v))
        parts = [substitute_range_var(t, v, Const(var, i)) for i in range(1, self.k)]
        return approx(Sum(v, t), add_all(parts))


def _plant(phi, var, v, rng):
    """Replace one constant or range variable of ``var`` in phi by ``v``."""
    spots = [x for x in iter_nodes(phi) if isinstance(x, (Const, RVar)) and x.var == var]
    if not spots:
        return phi
    target = rng.choice(spots)
    if isinstance(target, RVar):
        return substitute_range_var(phi, target, v)
    return rename_constants(phi, {target: v})


# schema -> (model class, PolyBase tag or schema id)
SCHEMA_CLASSES = {
    "EqReflex": "M+", "EqReplace": "M+", "EqDist": "M+", "Cond": "M+", "SumLower": "M+",
    "Pos": "M+", "Fin_N": "M_N+", "Distinct_N": "M_N+", "SumEquals_N": "M_N+",
    "NonNeg": "M+", "Add": "M+", "Dist": "M+", "Taut": "M+", "Lin": "M+",
}
POLYBASE = ("NonNeg", "Add", "Dist", "Taut", "Lin")

MUTATIONS = {
    "EqDist with ~ for !~": ("mut_EqDist_eq", "M+"),
    "Cond without * P(d')": ("mut_Cond_drop", "M+"),
    "SumLower without distinctness": ("mut_SumLower_bare", "M+"),
    "Fin_N with N+1": ("mut_Fin_plus", "M_N+"),
    "Pos flipped": ("mut_Pos_flip", "M+"),
    "Pos outside L_cond": ("mut_Pos_noncond", "M+"),
    "EqReflex on distinct constants": ("mut_EqReflex_distinct", "M_N+"),
    "SumEquals_N dropping a term": ("mut_SumEquals_short", "M_N+"),
}


def _instances(rng, model_class, cfg):
    return Instances(rng, cfg.n if model_class == "M_N+" else K_CONSTANTS)


def soundness_fuzz(schema: str, cfg: FuzzConfig = FuzzConfig(), pool=None,
                   rng=None) -> SchemaReport:
    """Sample ``cfg.trials`` instances of ``schema`` and check each in a random
    model of its class."""
    rng = rng or random.Random(f"{cfg.seed}:{schema}")
    cls = SCHEMA_CLASSES[schema]
    pool = pool or ModelPool(random.Random(f"{cfg.seed}:models"), cfg)
    gen = _instances(rng, cls, cfg)
    report = SchemaReport(schema, cls)
    sid = f"PolyBase:{schema}" if schema in POLYBASE else schema
    n = cfg.n if cls == "M_N+" else None
    for _ in range(cfg.trials):
        f = getattr(gen, schema)()
        report.trials += 1
        if check_axiom_instance(f, sid, n) is not None:
            report.not_recognized += 1
            continue
        ev = rng.choice(pool.pool(cls))
        if not ev.valid(f):
            report.violations.append(Violation(schema, show(f), ev.scm))
    return report


def mutation_fuzz(name: str, cfg: FuzzConfig = FuzzConfig(trials=300), pool=None,
                  rng=None) -> SchemaReport:
    rng = rng or random.Random(f"{cfg.seed}:{name}")
    method, cls = MUTATIONS[name]
    pool = pool or ModelPool(random.Random(f"{cfg.seed}:models"), cfg)
    gen = _instances(rng, cls, cfg)
    report = SchemaReport(name, cls)
    for _ in range(cfg.trials):
        f = getattr(gen, method)()
        report.trials += 1
        ev = rng.choice(pool.pool(cls))
        if not ev.valid(f):
            report.violations.append(Violation(name, show(f), ev.scm))
    return report


def fuzz_all(cfg: FuzzConfig = FuzzConfig()) -> dict:
    pool = ModelPool(random.Random(f"{cfg.seed}:models"), cfg)
    out = {s: soundness_fuzz(s, cfg, pool) for s in SCHEMA_CLASSES}
    mcfg = FuzzConfig(min(cfg.trials, 300), cfg.n, cfg.models_per_class, cfg.seed)
    out.update({m: mutation_fuzz(m, mcfg, pool) for m in MUTATIONS})
    return out


# ---------------------------------------------------------------------------
# rules


@dataclass
class RuleReport:
    rule: str
    trials: int = 0
    premises_held: int = 0
    violations: list = field(default_factory=list)
    bounded_gaps: int = 0  # infinitary rules: prefix held but conclusion failed

    @property
    def ok(self) -> bool:
        return not self.violations


def rule_fuzz(rule: str, cfg: FuzzConfig = FuzzConfig(trials=300), n_max: int = 16,
              pool=None) -> RuleReport:
    """Local soundness of one rule: whenever all premises are valid in a
    sampled model, the conclusion must be valid there too."""
    rng = random.Random(f"{cfg.seed}:rule:{rule}")
    pool = pool or ModelPool(random.Random(f"{cfg.seed}:models"), cfg)
    cls = "M_N+" if rule in ("SumUpper", "FreeIntro", "Unity") else "M+"
    gen = _instances(rng, cls, cfg)
    rep = RuleReport(rule)
    for _ in range(cfg.trials):
        ev = rng.choice(pool.pool(cls))
        prem, concl, bounded = _rule_instance(rule, gen, rng, cfg.n, n_max)
        rep.trials += 1
        if not all(ev.valid(p) for p in prem):
            continue
        rep.premises_held += 1
        if not ev.valid(concl):
            if bounded:
                rep.bounded_gaps += 1
            else:
                rep.violations.append(Violation(rule, show(concl), ev.scm))
    return rep


def _rule_instance(rule, gen: Instances, rng, n, n_max):
    if rule == "MP":
        p, q = gen.formula(), gen.formula()
        return [p, implies(p, q)], q, False
    if rule == "FreeElim":
        var = gen.var()
        v = RVar(var, 1)
        phi = _plant(gen.formula(), var, v, rng)
        return [phi], substitute_range_var(phi, v, gen.const(var)), False
    if rule == "FreeIntro":
        var = gen.var()
        v = RVar(var, 1)
        phi = _plant(gen.formula(), var, v, rng)
        return [substitute_range_var(phi, v, Const(var, i)) for i in range(1, n + 1)], phi, False
    if rule == "SumUpper":
        var = gen.var()
        x = RVar(var, 1)
        t = Prob(EAtom(var, x), gen.g.cond_event(()) if rng.random() < 0.3 else ETop())
        if rng.random() < 0.5:
            t = Add(t, gen.term())
        t2 = gen.term()
        phi = gen.formula() if rng.random() < 0.5 else None
        c = Geq(t2, Sum(x, t))
        c = implies(phi, c) if phi is not None else c
        fam = sumupper_family(c)
        return [fam(*i) for i in sumupper_indices(n)], c, False
    if rule == "Conv":
        t = gen.term()
        phi = gen.formula()
        c = implies(phi, Geq(zero(), t))
        fam = conv_family(c)
        return [fam(k) for k in range(1, n_max + 1)], c, True
    raise ValueError(f"no fuzzer for rule {rule}")


RULE_FUZZERS = ("MP", "FreeElim", "FreeIntro", "SumUpper", "Conv")
