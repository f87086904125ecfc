"""Finite recursive structural causal models with exact probabilities.

A model lists its endogenous variables in a declared order. Each variable has
explicit parents and a total table ``(parent values, u) -> value``; the
exogenous outcome ``u`` ranges over a finite set with a rational pmf. Tables may
name parents that come later in the order, but :func:`validate` then insists
that the table does not actually depend on them.

Events are evaluated as bitsets over exogenous outcomes, so that every box in
one event shares the same ``u`` (the counterfactual joint).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping

from .syntax import (
    Box, Const, EAnd, EAtom, ENot, ETop, FormulaError, RVar, int_assignments,
)


class ScmError(ValueError):
    """Structural problem with a model or an uninterpretable query."""


@dataclass(frozen=True)
class Scm:
    variables: tuple
    ranges: Mapping[str, tuple]
    parents: Mapping[str, tuple]
    exo: tuple  # ((u, weight), ...)
    tables: Mapping[str, Mapping[tuple, int]]
    constants: Mapping[str, Mapping[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "exo", tuple((u, Fraction(w)) for u, w in self.exo))
        object.__setattr__(self, "ranges",
                           {v: tuple(sorted(self.ranges[v])) for v in self.variables})
        object.__setattr__(self, "parents",
                           {v: tuple(self.parents.get(v, ())) for v in self.variables})

    @classmethod
    def from_functions(cls, variables, ranges, parents, exo, functions: Mapping[str, Callable],
                       constants=None) -> "Scm":
        """Tabulate ``functions[V](parent_values_tuple, u)`` over every row."""
        tables = {}
        for v in variables:
            ps = tuple(parents.get(v, ()))
            rows = {}
            for pv in itertools.product(*(sorted(ranges[p]) for p in ps)):
                for u, _ in exo:
                    rows[(pv, u)] = functions[v](pv, u)
            tables[v] = rows
        if constants is None:
            constants = identity_constants(ranges)
        return cls(tuple(variables), ranges, parents, tuple(exo), tables, constants)

    @property
    def outcomes(self) -> tuple:
        return tuple(u for u, _ in self.exo)

    def index(self, var: str) -> int:
        return self.variables.index(var)

    def n_values(self) -> int:
        return max((len(r) for r in self.ranges.values()), default=1)


def identity_constants(ranges) -> dict:
    """c_i denotes the i-th smallest value of the range."""
    return {v: {i + 1: val for i, val in enumerate(sorted(r))} for v, r in ranges.items()}


def padded_constants(ranges, n: int) -> dict:
    """Interpret c_1..c_n for every variable: distinct values first, then the
    largest value repeated (used for 𝓜_N models with ranges smaller than N)."""
    out = {}
    for v, r in ranges.items():
        vals = sorted(r)
        if len(vals) > n:
            raise ScmError(f"range of {v} has more than {n} values")
        out[v] = {i: vals[min(i, len(vals)) - 1] for i in range(1, n + 1)}
    return out


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    witness: object = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def __bool__(self):
        return self.ok


def validate(scm: Scm) -> ValidationReport:
    out = []
    order = scm.variables
    if len(set(order)) != len(order):
        out.append(Violation("order", "declared order repeats a variable"))
    for v in order:
        r = scm.ranges.get(v, ())
        if not r:
            out.append(Violation("range", f"range of {v} is empty"))
        if any((not isinstance(x, int)) or x < 1 for x in r):
            out.append(Violation("range", f"range of {v} must be positive integers"))
    weights = [w for _, w in scm.exo]
    if any(w < 0 for w in weights):
        out.append(Violation("pmf", "negative exogenous weight",
                             next(u for u, w in scm.exo if w < 0)))
    if sum(weights, Fraction(0)) != 1:
        out.append(Violation("pmf", f"pmf sums to {sum(weights, Fraction(0))}, not 1"))
    if len({u for u, _ in scm.exo}) != len(scm.exo):
        out.append(Violation("pmf", "repeated exogenous outcome"))
    for v in order:
        ps = scm.parents[v]
        if v in ps:
            out.append(Violation("parents", f"{v} lists itself as a parent"))
            continue
        unknown = [p for p in ps if p not in scm.ranges]
        if unknown:
            out.append(Violation("parents", f"{v} has unknown parents {unknown}"))
            continue
        table = scm.tables.get(v, {})
        for pv in itertools.product(*(scm.ranges[p] for p in ps)):
            for u in scm.outcomes:
                if (pv, u) not in table:
                    out.append(Violation("table", f"f_{v} undefined", (pv, u)))
                    break
                if table[(pv, u)] not in scm.ranges[v]:
                    out.append(Violation("table", f"f_{v} leaves Val({v})", (pv, u)))
                    break
            else:
                continue
            break
    for v in order:
        cmap = scm.constants.get(v, {})
        if any(val not in scm.ranges[v] for val in cmap.values()):
            out.append(Violation("constants", f"a constant of {v} denotes a value outside Val({v})"))
        missing = set(scm.ranges[v]) - set(cmap.values())
        if missing:
            out.append(Violation("closed-world", f"values {sorted(missing)} of {v} have no name",
                                 sorted(missing)))
    if not out:
        out.extend(_recursiveness(scm))
    return ValidationReport(tuple(out))


def _recursiveness(scm: Scm) -> list:
    pos = {v: i for i, v in enumerate(scm.variables)}
    out = []
    for v in scm.variables:
        ps = scm.parents[v]
        table = scm.tables[v]
        for k, p in enumerate(ps):
            if pos[p] < pos[v]:
                continue
            others = [scm.ranges[q] for q in ps]
            for pv in itertools.product(*others):
                for alt in scm.ranges[p]:
                    if alt <= pv[k]:
                        continue
                    pv2 = pv[:k] + (alt,) + pv[k + 1:]
                    for u in scm.outcomes:
                        if table[(pv, u)] != table[(pv2, u)]:
                            return [Violation(
                                "recursive",
                                f"f_{v} depends on {p}, which does not precede it",
                                ((dict(zip(ps, pv)), u), (dict(zip(ps, pv2)), u)))]
    return out


def check_valid(scm: Scm) -> Scm:
    rep = validate(scm)
    if not rep.ok:
        raise ScmError(f"invalid model: {rep.first.message}")
    return scm


# ---------------------------------------------------------------------------
# interventions and solving


def apply_intervention(scm: Scm, alpha: Mapping[str, int]) -> Scm:
    tables = dict(scm.tables)
    parents = dict(scm.parents)
    for var, val in alpha.items():
        if var not in scm.ranges:
            raise ScmError(f"unknown variable {var}")
        if val not in scm.ranges[var]:
            raise ScmError(f"value {val} outside Val({var})")
        tables[var] = {((), u): val for u in scm.outcomes}
        parents[var] = ()
    return Scm(scm.variables, scm.ranges, parents, scm.exo, tables, scm.constants)


def solve(scm: Scm, u, alpha: Mapping[str, int] | None = None) -> dict:
    """Endogenous values at outcome ``u`` under intervention ``alpha``."""
    alpha = alpha or {}
    vals = {}
    for v in scm.variables:
        if v in alpha:
            vals[v] = alpha[v]
            continue
        pv = tuple(vals.get(p, scm.ranges[p][0]) for p in scm.parents[v])
        vals[v] = scm.tables[v][(pv, u)]
    return vals


def joint_distribution(scm: Scm, alpha: Mapping[str, int] | None = None) -> dict:
    """Map from value tuples (in declared order) to probability."""
    dist = {}
    for u, w in scm.exo:
        if w == 0:
            continue
        s = solve(scm, u, alpha)
        key = tuple(s[v] for v in scm.variables)
        dist[key] = dist.get(key, Fraction(0)) + w
    return dist


# ---------------------------------------------------------------------------
# event evaluation


def symbol_value(scm: Scm, sym, iota: Mapping | None = None) -> int:
    if isinstance(sym, Const):
        try:
            return scm.constants[sym.var][sym.index]
        except KeyError:
            raise ScmError(f"constant {sym} is not interpreted") from None
    if isinstance(sym, RVar):
        if iota is None or (sym.var, sym.index) not in iota:
            raise ScmError(f"free range variable {sym} has no value")
        return iota[(sym.var, sym.index)]
    raise FormulaError(f"not a symbol: {sym!r}")


def resolve_intervention(scm: Scm, interv, iota=None) -> tuple:
    """Intervention formula to a sorted tuple of (var, value) pairs."""
    out = {}
    for var, sym in int_assignments(interv):
        val = symbol_value(scm, sym, iota)
        if out.get(var, val) != val:
            raise ScmError(f"intervention sets {var} to two different values")
        out[var] = val
    return tuple(sorted(out.items()))


class WorldCache:
    """Per-model cache of solved worlds and event bitsets over outcomes."""

    def __init__(self, scm: Scm):
        self.scm = scm
        self.weights = [w for _, w in scm.exo]
        self.full = (1 << len(self.weights)) - 1
        self._pos = {v: i for i, v in enumerate(scm.variables)}
        self._worlds = {}
        self._atoms = {}
        self._probs = {}

    def worlds(self, key: tuple) -> list:
        w = self._worlds.get(key)
        if w is None:
            scm = self.scm
            alpha = dict(key)
            w = []
            for u in scm.outcomes:
                s = solve(scm, u, alpha)
                w.append(tuple(s[v] for v in scm.variables))
            self._worlds[key] = w
        return w

    def atom_mask(self, key: tuple, var: str, value: int) -> int:
        k = (key, var, value)
        m = self._atoms.get(k)
        if m is None:
            if var not in self._pos:
                raise ScmError(f"unknown variable {var}")
            i = self._pos[var]
            m = 0
            for bit, world in enumerate(self.worlds(key)):
                if world[i] == value:
                    m |= 1 << bit
            self._atoms[k] = m
        return m

    def mask(self, e, iota=None, key: tuple = ()) -> int:
        if isinstance(e, ETop):
            return self.full
        if isinstance(e, EAtom):
            return self.atom_mask(key, e.var, symbol_value(self.scm, e.value, iota))
        if isinstance(e, ENot):
            return self.full ^ self.mask(e.arg, iota, key)
        if isinstance(e, EAnd):
            left = self.mask(e.left, iota, key)
            if not left:
                return 0
            return left & self.mask(e.right, iota, key)
        if isinstance(e, Box):
            return self.mask(e.body, iota, resolve_intervention(self.scm, e.intervention, iota))
        raise FormulaError(f"not an event: {e!r}")

    def mask_prob(self, m: int) -> Fraction:
        p = self._probs.get(m)
        if p is None:
            p = Fraction(0)
            bit = 0
            x = m
            while x:
                if x & 1:
                    p += self.weights[bit]
                x >>= 1
                bit += 1
            self._probs[m] = p
        return p

    def prob(self, e, iota=None) -> Fraction:
        return self.mask_prob(self.mask(e, iota))


def event_probability(scm: Scm, event, iota: Mapping | None = None) -> Fraction:
    return WorldCache(scm).prob(event, iota)


# ---------------------------------------------------------------------------
# influence and positivity


def induced_influences(scm: Scm, variables=None) -> set:
    """Pairs (Vi, Vj) such that interventions differing only in the value
    imposed on Vi give Vj different values at some positive-weight outcome."""
    variables = tuple(variables or scm.variables)
    cache = WorldCache(scm)
    pos = {v: i for i, v in enumerate(scm.variables)}
    live = [b for b, w in enumerate(cache.weights) if w > 0]
    found = set()
    for vi in variables:
        rest_all = [v for v in variables if v != vi]
        for vj in rest_all:
            if (vi, vj) in found:
                continue
            others = [v for v in rest_all if v != vj]
            hit = False
            for r in range(len(others) + 1):
                for sub in itertools.combinations(others, r):
                    for vals in itertools.product(*(scm.ranges[v] for v in sub)):
                        base = dict(zip(sub, vals))
                        ws = []
                        for a in scm.ranges[vi]:
                            ws.append(cache.worlds(tuple(sorted({**base, vi: a}.items()))))
                        j = pos[vj]
                        for b in live:
                            if len({w[b][j] for w in ws}) > 1:
                                hit = True
                                break
                        if hit:
                            break
                    if hit:
                        break
                if hit:
                    break
            if hit:
                found.add((vi, vj))
    return found


def check_positivity(scm: Scm) -> bool:
    dist = joint_distribution(scm)
    total = 1
    for v in scm.variables:
        total *= len(scm.ranges[v])
    return len(dist) == total and all(p > 0 for p in dist.values())


def max_range(scm: Scm) -> int:
    return max((len(scm.ranges[v]) for v in scm.variables), default=1)


def outcome_count(scm: Scm) -> int:
    return len(scm.exo)


__all__ = [
    "Scm", "ScmError", "Violation", "ValidationReport", "validate", "check_valid",
    "apply_intervention", "solve", "joint_distribution", "symbol_value",
    "resolve_intervention", "WorldCache", "event_probability", "induced_influences",
    "check_positivity", "identity_constants", "padded_constants",
]
