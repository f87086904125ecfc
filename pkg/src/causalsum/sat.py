"""Bounded satisfiability through state descriptions.

Pipeline for a sequent ``Γ ⇒ φ`` over models with N constants per variable:

1. universal closure of every formula, giving ``ψ = (∧ Γ̄) → φ̄``;
2. a case split on which constants denote the same value (partitions of
   c_1..c_N per variable, restricted-growth order); equality atoms become
   truth constants and constants are replaced by block representatives;
3. unfolding of sums over the representatives, then removal of conditional
   probabilities (guarded, so the rewrite is exact);
4. for every variable order, the state descriptions realisable by a
   deterministic recursive system under the interventions of ψ, grouped into
   classes that no event of ψ can tell apart;
5. supports of increasing size, each reduced to a polynomial system over the
   class probabilities and handed to the bounded-denominator search.

A witness is rebuilt as an :class:`~causalsum.scm.Scm` and must satisfy the
original sequent under the semantics module before SAT is reported.

:func:`brute_force_sat` is an independent oracle that enumerates tiny models
directly and never touches the reduction.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

from .constraints import (
    ConstraintSystem, Poly, SolveResult, atom, b_and, b_not, prove_infeasible,
    solve_constraints_small,
)
from .grounding import GroundingContext, eliminate_conditionals, universal_closure, unfold_sums
from .scm import Scm, check_positivity, validate
from .semantics import Evaluator
from .syntax import (
    Add, And, Box, Const, ConstSym, EAnd, EAtom, ENot, ETop, Eq, FormulaError, Geq, Mul,
    Neg, Not, Prob, RVar, RangeSym, Sequent, Sum, conj, constants_in, false_formula,
    implies, int_assignments, interventions_in, iter_nodes, rename_constants,
    true_formula, variables_in,
)


class SatError(RuntimeError):
    """Scale cap exceeded or an input outside the supported fragment."""


# ---------------------------------------------------------------------------
# state descriptions


@dataclass(frozen=True)
class StateDescription:
    """Outcome of every scoped intervention: ``worlds[k]`` is the assignment
    (in ``variables`` order) under ``interventions[k]``."""

    variables: tuple
    interventions: tuple  # intervention keys: sorted tuples of (var, value)
    worlds: tuple

    def world(self, key: tuple) -> tuple:
        try:
            return self.worlds[self.interventions.index(key)]
        except ValueError:
            raise SatError(f"intervention {dict(key)} is outside the description's scope") from None

    def show(self) -> str:
        parts = []
        for key, w in zip(self.interventions, self.worlds):
            assign = " & ".join(f"{v}={x}" for v, x in zip(self.variables, w))
            parts.append(f"[{', '.join(f'{v}={x}' for v, x in key) or 'true'}] ({assign})")
        return " & ".join(parts)


@dataclass(frozen=True)
class DescriptionSet:
    variables: tuple
    interventions: tuple
    size: int
    descriptions: tuple | None  # None when the size exceeds the cap


def all_interventions(variables, ranges) -> list:
    """Every partial assignment of the variables, the empty one first."""
    out = []
    for r in range(len(variables) + 1):
        for sub in itertools.combinations(variables, r):
            for vals in itertools.product(*(ranges[v] for v in sub)):
                out.append(tuple(sorted(zip(sub, vals))))
    return out


def formula_interventions(f, constants: Mapping) -> list:
    keys = [()]
    for interv in interventions_in(f):
        key = _resolve(interv, constants)
        if key not in keys:
            keys.append(key)
    return keys


def _resolve(interv, constants) -> tuple:
    out = {}
    for var, sym in int_assignments(interv):
        if not isinstance(sym, Const):
            raise SatError("free range variable in an intervention; close the formula first")
        val = constants[var][sym.index]
        if out.get(var, val) != val:
            raise SatError(f"intervention sets {var} to two values")
        out[var] = val
    return tuple(sorted(out.items()))


def description_count(variables, ranges, interventions) -> int:
    total = 1
    for key in interventions:
        fixed = dict(key)
        for v in variables:
            if v not in fixed:
                total *= len(ranges[v])
    return total


def enumerate_state_descriptions(f, ranges: Mapping, constants: Mapping | None = None,
                                 scope: str = "all", cap: int = 200_000) -> DescriptionSet:
    """The set Δ: one assignment per scoped intervention, intervened variables
    fixed to their imposed values, everything else free. ``scope='all'`` uses
    every intervention over the formula's variables; ``scope='formula'`` only
    those occurring in the formula (plus the empty one)."""
    variables = tuple(sorted(variables_in(f)))
    ranges = {v: tuple(ranges[v]) for v in variables}
    if constants is None:
        constants = {v: {i + 1: x for i, x in enumerate(ranges[v])} for v in variables}
    if scope == "all":
        keys = all_interventions(variables, ranges)
    elif scope == "formula":
        keys = formula_interventions(f, constants)
    else:
        raise ValueError(f"unknown scope {scope}")
    n = description_count(variables, ranges, keys)
    if n > cap:
        return DescriptionSet(variables, tuple(keys), n, None)
    per_key = []
    for key in keys:
        fixed = dict(key)
        per_key.append([tuple(vals) for vals in itertools.product(
            *((fixed[v],) if v in fixed else ranges[v] for v in variables))])
    descs = tuple(StateDescription(variables, tuple(keys), worlds)
                  for worlds in itertools.product(*per_key))
    return DescriptionSet(variables, tuple(keys), n, descs)


def influences_of(delta: StateDescription) -> set:
    """Pairs (Vi, Vj) read off one description: two scoped interventions that
    differ only in the value imposed on Vi give Vj different values."""
    out = set()
    keys = [dict(k) for k in delta.interventions]
    pos = {v: i for i, v in enumerate(delta.variables)}
    for a, wa in zip(keys, delta.worlds):
        for b, wb in zip(keys, delta.worlds):
            if a is b or set(a) != set(b):
                continue
            diff = [v for v in a if a[v] != b[v]]
            if len(diff) != 1:
                continue
            vi = diff[0]
            for vj in delta.variables:
                if vj != vi and vj not in a and wa[pos[vj]] != wb[pos[vj]]:
                    out.add((vi, vj))
    return out


@dataclass(frozen=True)
class Support:
    descriptions: tuple
    order: tuple


def check_support_compatibility(support: Support) -> bool:
    """No induced Vi ⇝ Vj with Vj earlier than Vi in the order."""
    rank = {v: i for i, v in enumerate(support.order)}
    for delta in support.descriptions:
        for vi, vj in influences_of(delta):
            if rank[vj] < rank[vi]:
                return False
    return True


def realizable_descriptions(variables, ranges, interventions, order) -> list:
    """Descriptions produced by some deterministic system in which each
    variable reads only the variables before it in ``order``."""
    pos = {v: i for i, v in enumerate(variables)}
    keys = [dict(k) for k in interventions]
    out = []
    worlds = [dict() for _ in keys]

    def rec(depth):
        if depth == len(order):
            out.append(StateDescription(
                tuple(variables), tuple(interventions),
                tuple(tuple(w[v] for v in variables) for w in worlds)))
            return
        v = order[depth]
        preds = order[:depth]
        groups = {}
        for k, key in enumerate(keys):
            if v in key:
                worlds[k][v] = key[v]
            else:
                groups.setdefault(tuple(worlds[k][p] for p in preds), []).append(k)
        glist = list(groups.values())
        for choice in itertools.product(ranges[v], repeat=len(glist)):
            for members, val in zip(glist, choice):
                for k in members:
                    worlds[k][v] = val
            rec(depth + 1)
        for w in worlds:
            w.pop(v, None)

    rec(0)
    return out


def holds(e, delta: StateDescription, constants: Mapping, key: tuple = ()) -> bool:
    """Truth of an event in a description."""
    if isinstance(e, ETop):
        return True
    if isinstance(e, EAtom):
        if not isinstance(e.value, Const):
            raise SatError("free range variable inside an event")
        w = delta.world(key)
        return w[delta.variables.index(e.var)] == constants[e.var][e.value.index]
    if isinstance(e, ENot):
        return not holds(e.arg, delta, constants, key)
    if isinstance(e, EAnd):
        return holds(e.left, delta, constants, key) and holds(e.right, delta, constants, key)
    if isinstance(e, Box):
        return holds(e.body, delta, constants, _resolve(e.intervention, constants))
    raise FormulaError(f"not an event: {e!r}")


# ---------------------------------------------------------------------------
# reduction


def probability_events(f) -> list:
    out = []
    for n in iter_nodes(f):
        if isinstance(n, Prob):
            if not isinstance(n.cond, ETop):
                raise SatError("conditional probability left; eliminate conditionals first")
            if n.event not in out:
                out.append(n.event)
    return out


def _translate(f, n, event_poly, constants):
    if isinstance(f, Geq):
        return atom(_term_poly(f.left, n, event_poly, constants)
                    - _term_poly(f.right, n, event_poly, constants), ">=")
    if isinstance(f, Not):
        return b_not(_translate(f.arg, n, event_poly, constants))
    if isinstance(f, And):
        return b_and(_translate(f.left, n, event_poly, constants),
                     _translate(f.right, n, event_poly, constants))
    if isinstance(f, Eq):
        if not (isinstance(f.left, Const) and isinstance(f.right, Const)):
            raise SatError("free range variable in an equality atom")
        same = constants[f.left.var][f.left.index] == constants[f.right.var][f.right.index]
        return atom(Poly.const(n, 0), ">=" if same else ">")
    raise FormulaError(f"not a formula: {f!r}")


def _term_poly(t, n, event_poly, constants) -> Poly:
    if isinstance(t, Prob):
        if not isinstance(t.cond, ETop):
            raise SatError("conditional probability left; eliminate conditionals first")
        return event_poly(t.event)
    if isinstance(t, Add):
        return _term_poly(t.left, n, event_poly, constants) + _term_poly(t.right, n, event_poly, constants)
    if isinstance(t, Mul):
        return _term_poly(t.left, n, event_poly, constants) * _term_poly(t.right, n, event_poly, constants)
    if isinstance(t, Neg):
        return -_term_poly(t.arg, n, event_poly, constants)
    if isinstance(t, ConstSym):
        return Poly.const(n, constants[t.sym.var][t.sym.index])
    if isinstance(t, (Sum, RangeSym)):
        raise SatError("sums and range variables must be grounded before reduction")
    raise FormulaError(f"not a term: {t!r}")


def reduce_to_constraints(f, support: Support, constants: Mapping, strict: bool = True,
                          positive_cells: bool = False) -> ConstraintSystem:
    """Replace every P(ε) by the sum of p_δ over support descriptions δ ⊨ ε.

    An event true in every description of the support becomes the constant 1.
    With ``positive_cells`` every observational cell of the formula's variables
    must receive positive mass.
    """
    descs = support.descriptions
    n = len(descs)
    cache = {}

    def event_poly(e):
        if e not in cache:
            members = [i for i, d in enumerate(descs) if holds(e, d, constants)]
            if len(members) == n:
                cache[e] = Poly.const(n, 1)
            else:
                p = Poly.const(n, 0)
                for i in members:
                    p = p + Poly.var(n, i)
                cache[e] = p
        return cache[e]

    body = _translate(f, n, event_poly, constants)
    if positive_cells and descs:
        extra = []
        variables = descs[0].variables
        for cell in itertools.product(*(sorted(set(constants[v].values())) for v in variables)):
            p = Poly.const(n, 0)
            for i, d in enumerate(descs):
                if d.world(()) == cell:
                    p = p + Poly.var(n, i)
            extra.append(atom(p, ">"))
        body = b_and(*extra, body)
    return ConstraintSystem(n, body, "simplex", strict,
                            tuple(f"p[{d.show()}]" for d in descs))


# ---------------------------------------------------------------------------
# equality casing


def restricted_growth_strings(n: int) -> Iterator[tuple]:
    """Set partitions of {0..n-1} as restricted-growth strings, in order."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))
    if n == 0:
        yield ()
        return
    yield from rec([0], 0)


@dataclass(frozen=True)
class Case:
    """Partition of each variable's constants into equal-value blocks."""

    blocks: tuple  # ((var, rgs), ...)

    def rgs(self, var) -> tuple:
        return dict(self.blocks)[var]

    def representative(self, c: Const) -> Const:
        rgs = self.rgs(c.var)
        block = rgs[c.index - 1]
        return Const(c.var, rgs.index(block) + 1)

    def reps(self, var) -> tuple:
        rgs = self.rgs(var)
        return tuple(Const(var, rgs.index(b) + 1) for b in range(max(rgs) + 1))


def cases(variables, n: int, model_class: str) -> Iterator[Case]:
    if model_class == "M_N":
        per_var = [[tuple(range(n))] for _ in variables]
    elif model_class == "upto":
        per_var = [list(restricted_growth_strings(n)) for _ in variables]
    else:
        raise ValueError(f"unknown model class {model_class!r}")
    for combo in itertools.product(*per_var):
        yield Case(tuple(zip(variables, combo)))


def apply_case(f, case: Case, n: int):
    """Constants to representatives, equalities to truth constants, sums
    unfolded over the representatives."""
    mapping = {}
    for var, _ in case.blocks:
        for i in range(1, n + 1):
            c = Const(var, i)
            mapping[c] = case.representative(c)
    g = rename_constants(f, mapping)
    g = _resolve_eqs(g)
    ctx = GroundingContext(n, tuple((var, case.reps(var)) for var, _ in case.blocks))
    return unfold_sums(g, ctx)


def _resolve_eqs(f):
    if isinstance(f, Eq):
        if isinstance(f.left, Const) and isinstance(f.right, Const):
            return true_formula() if f.left == f.right else false_formula()
        raise SatError("free range variable in an equality atom")
    if isinstance(f, Not):
        return Not(_resolve_eqs(f.arg))
    if isinstance(f, And):
        return And(_resolve_eqs(f.left), _resolve_eqs(f.right))
    return f


def value_maps(case: Case, n: int, need_values: bool) -> Iterator[dict]:
    """Values for the blocks of each variable: canonical 1..k when the formula
    has no coefficient symbols, otherwise every injective map into 1..N."""
    per_var = []
    for var, rgs in case.blocks:
        k = max(rgs) + 1
        if need_values:
            per_var.append(list(itertools.permutations(range(1, n + 1), k)))
        else:
            per_var.append([tuple(range(1, k + 1))])
    for combo in itertools.product(*per_var):
        yield {var: vals for (var, _), vals in zip(case.blocks, combo)}


# ---------------------------------------------------------------------------
# the bounded decision procedure


@dataclass(frozen=True)
class SatConfig:
    n: int = 2
    denom: int = 16
    mode: str = "auto"          # auto | prob | causal
    positive: bool = False
    model_class: str = "M_N"    # M_N (exactly N values) | upto (at most N)
    support_cap: int = 64
    max_evals: int = 2_000_000
    prune_boxes: int = 400
    time_limit: float | None = None

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise SatError("N must be between 1 and 3 (raise MAX_N to go further)")
        if not 1 <= self.denom <= 64:
            raise SatError("denominator bound must be between 1 and 64")


@dataclass
class SatResult:
    verdict: str  # SAT | UNSAT | UNSAT-at-scale | UNKNOWN
    witness: Scm | None = None
    stats: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def definitive(self) -> bool:
        return self.verdict in ("SAT", "UNSAT", "UNSAT-at-scale")


def closed_formula(seq: Sequent, n: int):
    """ψ = (∧ Γ̄) → φ̄ with every formula universally closed over c_1..c_N."""
    concl = universal_closure(seq.conclusion, n)
    if not seq.premises:
        return concl
    return implies(conj([universal_closure(g, n) for g in seq.premises]), concl)


def _has_coefficients(f) -> bool:
    return any(isinstance(x, (ConstSym, RangeSym)) for x in iter_nodes(f))


def sat_bounded(seq: Sequent, cfg: SatConfig = SatConfig()) -> SatResult:
    start = time.monotonic()
    n = cfg.n
    for c in constants_in(seq):
        if c.index > n:
            raise SatError(f"constant {c} is outside the signature with N={n}")
    variables = tuple(sorted(variables_in(seq)))
    psi = closed_formula(seq, n)
    causal = bool(interventions_in(psi))
    if cfg.mode == "prob" and causal:
        raise SatError("prob mode given a formula with interventions")
    if cfg.mode == "causal":
        causal = True
    stats = {"cases": 0, "value_maps": 0, "orders": 0, "supports": 0, "evaluations": 0,
             "pruned": 0, "branches": 0, "max_classes": 0}
    budget_hit = False
    all_pruned = True
    for case in cases(variables, n, cfg.model_class):
        stats["cases"] += 1
        grounded = eliminate_conditionals(apply_case(psi, case, n), guard=True)
        need_values = _has_coefficients(grounded)
        for vmap in value_maps(case, n, need_values):
            stats["value_maps"] += 1
            constants = {var: {i: vmap[var][case.rgs(var)[i - 1]] for i in range(1, n + 1)}
                         for var in variables}
            ranges = {var: tuple(sorted(vmap[var])) for var in variables}
            keys = formula_interventions(grounded, constants)
            orders = list(itertools.permutations(variables)) if causal else [variables]
            events = probability_events(grounded)
            for order in orders:
                stats["orders"] += 1
                stats["branches"] += 1
                descs = realizable_descriptions(variables, ranges, keys, order)
                classes = _classes(descs, events, constants, cfg.positive)
                stats["max_classes"] = max(stats["max_classes"], len(classes))
                full = reduce_to_constraints(grounded, Support(tuple(classes), order),
                                             constants, strict=False,
                                             positive_cells=cfg.positive)
                if prove_infeasible(full, max_boxes=4 * cfg.prune_boxes):
                    stats["pruned"] += 1
                    continue
                all_pruned = False
                outcome, evals = _search_supports(
                    grounded, classes, order, constants, cfg, stats, start)
                stats["evaluations"] += evals
                if isinstance(outcome, SatResult):
                    outcome.stats = dict(stats, seconds=round(time.monotonic() - start, 3))
                    witness = _rebuild(outcome.witness_data, variables, ranges, constants, order)
                    _verify(witness, seq, cfg)
                    return SatResult("SAT", witness, outcome.stats)
                if outcome == "budget":
                    budget_hit = True
    stats["seconds"] = round(time.monotonic() - start, 3)
    if budget_hit:
        return SatResult("UNKNOWN", None, stats, "evaluation budget exhausted")
    if all_pruned and not _has_coefficients(psi):
        return SatResult("UNSAT", None, stats, "every case refuted over the reals")
    if all_pruned:
        return SatResult("UNSAT-at-scale", None, stats,
                         f"every case refuted over the reals for values up to {n}")
    return SatResult("UNSAT-at-scale", None, stats,
                     f"no witness with support <= {cfg.support_cap} and denominators <= {cfg.denom}")


def _classes(descs, events, constants, positive) -> list:
    seen = {}
    for d in descs:
        sig = tuple(holds(e, d, constants) for e in events)
        if positive:
            sig = sig + (d.world(()),)
        if sig not in seen:
            seen[sig] = d
    return list(seen.values())


class _Found(SatResult):
    pass


def _search_supports(f, classes, order, constants, cfg: SatConfig, stats, start):
    evals = 0
    m = len(classes)
    cells = None
    if cfg.positive:
        cells = {d.world(()) for d in classes}
    for k in range(1, min(cfg.support_cap, m) + 1):
        for idx in itertools.combinations(range(m), k):
            if cfg.time_limit and time.monotonic() - start > cfg.time_limit:
                return "budget", evals
            chosen = tuple(classes[i] for i in idx)
            if cells is not None and {d.world(()) for d in chosen} != cells:
                continue
            stats["supports"] += 1
            cs = reduce_to_constraints(f, Support(chosen, order), constants, strict=True,
                                       positive_cells=cfg.positive)
            res = solve_constraints_small(cs, cfg.denom, max_evals=cfg.max_evals - evals,
                                          prune=False)
            evals += res.evaluations
            if res.found:
                out = _Found("SAT")
                out.witness_data = (chosen, res.witness)
                return out, evals
            if res.status == "budget" or evals >= cfg.max_evals:
                return "budget", evals
    return "exhausted", evals


def _rebuild(data, variables, ranges, constants, order) -> Scm:
    descs, weights = data
    pos = {v: i for i, v in enumerate(variables)}
    parents = {v: tuple(order[:order.index(v)]) for v in order}
    tables = {v: {} for v in variables}
    exo = []
    for u, (d, w) in enumerate(zip(descs, weights)):
        exo.append((u, w))
        for v in variables:
            ps = parents[v]
            seen = {}
            for key, world in zip(d.interventions, d.worlds):
                if v in dict(key):
                    continue
                seen[tuple(world[pos[p]] for p in ps)] = world[pos[v]]
            for pv in itertools.product(*(ranges[p] for p in ps)):
                tables[v][(pv, u)] = seen.get(pv, ranges[v][0])
    return Scm(tuple(order), ranges, parents, tuple(exo), tables,
               {v: dict(constants[v]) for v in variables})


def _verify(scm: Scm, seq: Sequent, cfg: SatConfig):
    rep = validate(scm)
    if not rep.ok:
        raise AssertionError(f"reconstructed witness is invalid: {rep.first.message}")
    if cfg.positive and not check_positivity(scm):
        raise AssertionError("reconstructed witness is not positive")
    if not Evaluator(scm).sequent(seq):
        raise AssertionError("reconstructed witness does not satisfy the sequent")


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class BruteConfig:
    n: int = 2
    denom: int = 8
    max_outcomes: int = 4
    positive: bool = False
    model_class: str = "M_N"
    max_variables: int = 2


def _range_choices(n, model_class):
    if model_class == "M_N":
        return [tuple(range(1, n + 1))]
    out = []
    for k in range(1, n + 1):
        out.extend(itertools.combinations(range(1, n + 1), k))
    return out


def _surjections(n, values):
    for img in itertools.product(values, repeat=n):
        if set(img) == set(values):
            yield {i + 1: x for i, x in enumerate(img)}


def _systems(order, ranges):
    """Every deterministic system recursive in ``order``: full tables over the
    values of all earlier variables."""
    per_var = []
    for i, v in enumerate(order):
        preds = order[:i]
        configs = list(itertools.product(*(ranges[p] for p in preds)))
        per_var.append([dict(zip(configs, outs))
                        for outs in itertools.product(ranges[v], repeat=len(configs))])
    for combo in itertools.product(*per_var):
        yield dict(zip(order, combo))


def _positive_compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for k in range(1, total - parts + 2):
        for rest in _positive_compositions(total - k, parts - 1):
            yield (k,) + rest


def brute_force_sat(seq: Sequent, cfg: BruteConfig = BruteConfig()) -> SatResult:
    """Enumerate every model in the finite lattice and evaluate the sequent."""
    variables = tuple(sorted(variables_in(seq)))
    if len(variables) > cfg.max_variables or cfg.n > 2 or cfg.max_outcomes > 4:
        raise SatError("brute force is limited to 2 variables, N <= 2, 4 exogenous outcomes")
    checked = 0
    start = time.monotonic()
    for shape in itertools.product(*(_range_choices(cfg.n, cfg.model_class) for _ in variables)):
        ranges = dict(zip(variables, shape))
        const_choices = [list(_surjections(cfg.n, ranges[v])) for v in variables]
        for order in itertools.permutations(variables):
            systems = list(_systems(order, ranges))
            parents = {v: tuple(order[:i]) for i, v in enumerate(order)}
            for k in range(1, cfg.max_outcomes + 1):
                for chosen in itertools.combinations(range(len(systems)), k):
                    tables = {v: {} for v in variables}
                    for u, s in enumerate(chosen):
                        for v in variables:
                            for pv, out in systems[s][v].items():
                                tables[v][(pv, u)] = out
                    for consts in itertools.product(*const_choices):
                        template = Scm(order, ranges, parents,
                                       tuple((u, Fraction(1, k)) for u in range(k)), tables,
                                       dict(zip(variables, consts)))
                        if cfg.positive and not check_positivity(template):
                            continue  # weights are positive, so support alone decides
                        ev = Evaluator(template)
                        for weights in _weight_vectors(k, cfg.denom):
                            # same tables, new weights: keep solved worlds, drop probabilities
                            ev.worlds.weights = list(weights)
                            ev.worlds._probs.clear()
                            checked += 1
                            if ev.sequent(seq):
                                scm = _with_weights(template, weights)
                                return SatResult("SAT", scm, {
                                    "models": checked,
                                    "seconds": round(time.monotonic() - start, 3)})
    return SatResult("UNSAT", None, {"models": checked,
                                     "seconds": round(time.monotonic() - start, 3)},
                     "no model in the lattice satisfies the sequent")


def _weight_vectors(k, denom):
    for d in range(k, denom + 1):
        for comp in _positive_compositions(d, k):
            if _gcd_all(comp, d) == 1:  # otherwise seen with a smaller denominator
                yield tuple(Fraction(c, d) for c in comp)


def _with_weights(scm: Scm, weights) -> Scm:
    return Scm(scm.variables, scm.ranges, scm.parents,
               tuple((u, w) for (u, _), w in zip(scm.exo, weights)), scm.tables, scm.constants)


def _gcd_all(comp, d) -> int:
    from math import gcd
    g = d
    for c in comp:
        g = gcd(g, c)
    return g
