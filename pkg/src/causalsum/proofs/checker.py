"""Proof objects and the checker.

A proof is a list of labelled nodes; premises refer to earlier labels, so the
list order is a topological order of the DAG. Infinitary rules take their
premises from a generator (index -> sub-proof) that is checked up to
``n_max``; such a proof is at best ``verified-bounded``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..sat import restricted_growth_strings
from ..syntax import (
    And, Box, Const, ConstSym, EAtom, ENot, ETop, Eq, FormulaError, Geq, Mul, Not, Prob, RangeSym,
    Sum, conj, conjuncts, e_conj, e_disj, e_or, free_vars, implies, is_cond_formula,
    iter_nodes, lt, numeral, one, show, substitute_event, substitute_range_var, zero, add_all,
)
from ..syntax import _rebuild
from .polybase import as_implies, term_poly
from .schemas import check_axiom_instance

VERIFIED = "verified"
BOUNDED = "verified-bounded"
REJECTED = "rejected"

# SumUpper premise families grow with the Bell numbers; generator checks stop here
SUMUPPER_GENERATOR_CAP = 6

RULES = ("MP", "Conv", "Unity", "SumUpper", "Fin", "FreeElim", "FreeIntro", "Deduction")
# arity class of each rule
ARITY = {
    "MP": "finitary",
    "Conv": "infinitary",
    "Fin": "infinitary",
    "Unity": "finitary-under-bounded",
    "SumUpper": "finitary-under-bounded",
    "FreeIntro": "finitary-under-bounded",
    "FreeElim": "finitary",
    "Deduction": "derived",
}


class ProofError(ValueError):
    pass


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class System:
    """``base`` is AX, AX_N or AX_fin. ``n`` fixes a Bounded(N) signature."""

    base: str = "AX"
    closed: bool = False
    n: int | None = None
    extras: tuple = ()

    def __post_init__(self):
        if self.base not in ("AX", "AX_N", "AX_fin"):
            raise ProofError(f"unknown system {self.base!r}")
        if self.base == "AX_N" and self.n is None:
            raise ProofError("AX_N needs N")
        if self.n is not None and self.n < 1:
            raise ProofError("N must be >= 1")
        for e in self.extras:
            if e not in ("Distinct_N", "SumEquals_N"):
                raise ProofError(f"unknown extra axiom {e!r}")
            if self.n is None:
                raise ProofError(f"{e} needs a bounded signature")

    @classmethod
    def parse(cls, name: str, n: int | None = None, extras=()) -> "System":
        """Accepts AX, AX_N, AX_fin, AX_2 (= AX_N with N=2), each optionally
        with a ``_closed`` suffix or ``^closed``."""
        s = name.replace("^closed", "_closed").replace(" ", "")
        closed = s.endswith("_closed")
        if closed:
            s = s[: -len("_closed")]
        m = re.fullmatch(r"AX_(\d+)", s)
        if m:
            k = int(m.group(1))
            if n is not None and n != k:
                raise ProofError(f"system {name} conflicts with N={n}")
            s, n = "AX_N", k
        return cls(s, closed, n, tuple(extras))

    @property
    def name(self) -> str:
        base = f"AX_{self.n}" if self.base == "AX_N" else self.base
        return base + ("_closed" if self.closed else "")

    def axioms(self) -> tuple:
        out = ["EqReflex", "EqReplace", "EqDist", "Cond", "SumLower", "Pos"]
        if self.base == "AX_N":
            out.append("Fin_N")
        out.extend(self.extras)
        return tuple(out)

    def rules(self) -> tuple:
        out = ["MP", "Conv", "Unity", "SumUpper", "Deduction"]
        if self.base == "AX_fin":
            out.append("Fin")
        if not self.closed:
            out += ["FreeElim", "FreeIntro"]
        return tuple(out)


# ---------------------------------------------------------------------------
# proof objects


@dataclass(frozen=True)
class Axiom:
    schema: str
    args: tuple | None = None


@dataclass(frozen=True)
class Rule:
    name: str
    premises: tuple = ()
    generator: str | None = None


@dataclass(frozen=True)
class Hyp:
    index: int  # 1-based into the hypothesis list


@dataclass(frozen=True)
class Deduction:
    """Derived rule: from ``source`` proving psi under hypothesis ``discharge``
    (phi), conclude phi -> psi without that hypothesis."""

    source: str
    discharge: int


@dataclass(frozen=True)
class Node:
    label: str
    formula: object
    just: object


@dataclass
class Proof:
    nodes: list
    hypotheses: tuple = ()
    goal: object = None
    system: System = field(default_factory=System)
    expect: str | None = None
    name: str = ""
    notes: dict = field(default_factory=dict)  # label -> comment, kept by scripts


@dataclass(frozen=True)
class Verdict:
    status: str
    node: str | None = None
    rule: str | None = None
    reason: str = ""
    bounded: tuple = ()  # (label, rule, n checked)

    @property
    def ok(self) -> bool:
        return self.status != REJECTED

    def show(self) -> str:
        if self.status == REJECTED:
            return f"rejected at {self.node} ({self.rule}): {self.reason}"
        if self.status == BOUNDED:
            parts = ", ".join(f"{lab} {rule} n<={k}" for lab, rule, k in self.bounded)
            return f"verified-bounded ({parts})"
        return "verified"


class _Reject(Exception):
    def __init__(self, node, rule, reason):
        super().__init__(reason)
        self.node, self.rule, self.reason = node, rule, reason


# ---------------------------------------------------------------------------
# language restrictions


def admissible(f, system: System) -> str | None:
    """Reason ``f`` is outside the proof language of ``system``, or None."""
    for x in iter_nodes(f):
        if isinstance(x, Box):
            return "interventions are outside the probabilistic proof language"
        if isinstance(x, (ConstSym, RangeSym)):
            return "coefficient symbols are outside the proof language"
        if isinstance(x, Prob) and not is_cond_formula(x.cond):
            return f"condition of {show(x)} is not in L_cond"
        if isinstance(x, Const) and system.n is not None and x.index > system.n:
            return f"constant {show(x)} is outside Bounded({system.n})"
    if system.closed and free_vars(f):
        return "free range variables in a closed system"
    return None


# ---------------------------------------------------------------------------
# premise families


def _wrap(phi, body):
    return body if phi is None else implies(phi, body)


def _split_phi(c, test):
    """(phi, body) with c = phi -> body or c = body, where ``test(body)``."""
    if test(c):
        return None, c
    imp = as_implies(c)
    if imp is not None and test(imp[1]):
        return imp
    return None


def conv_family(c):
    """Premise n of Conv for conclusion ``[phi ->] t <= 0``, or None."""
    sp = _split_phi(c, lambda b: isinstance(b, Geq) and b.left == zero())
    if sp is None:
        return None
    phi, body = sp
    t = body.right
    return lambda n: _wrap(phi, Geq(one(), Mul(t, numeral(n))))


def _is_top_sum(t):
    return isinstance(t, Sum) and t.body == Prob(ETop(), ETop())


def fin_family(c):
    """Premise n of Fin for conclusion ``[phi ->] sum x . P(true) < 0``."""
    def test(b):
        return (isinstance(b, And) and isinstance(b.left, Geq) and b.left.left == zero()
                and _is_top_sum(b.left.right) and b == lt(b.left.right, zero()))
    sp = _split_phi(c, test)
    if sp is None:
        return None
    phi, body = sp
    s = body.left.right
    return lambda n: _wrap(phi, Geq(s, numeral(n)))


def _unity_star(e):
    """Variables X with e = /\\_X (X=c1 or !X=c1), else None."""
    out = []
    for part in conjuncts(e):
        if not isinstance(part, ENot):
            return None
        try:
            a = part.arg.left.arg
        except AttributeError:
            return None
        if not isinstance(a, EAtom) or a.value != Const(a.var, 1):
            return None
        if part != e_or(a, ENot(a)) or a.var in out:
            return None
        out.append(a.var)
    return out


def _replace(node, old, new):
    if node == old:
        return new
    if isinstance(node, (Const, ETop, EAtom, Eq, str)):
        return node
    if isinstance(node, Sum):
        return Sum(node.bound, _replace(node.body, old, new))
    return _rebuild(node, lambda x: _replace(x, old, new))


def unity_family(c):
    """Premise n of Unity for ``[phi ->] 1 - P(E*) > q`` (q > 0)."""
    stars = {x for x in iter_nodes(c)
             if isinstance(x, Prob) and isinstance(x.cond, ETop) and _unity_star(x.event)}
    if len(stars) != 1:
        return None
    p = stars.pop()
    xs = _unity_star(p.event)
    key = (show(p),)

    def test(b):
        if not (isinstance(b, And) and isinstance(b.left, Geq)):
            return False
        left, right = b.left.left, b.left.right
        if b.right != Not(Geq(right, left)):
            return False
        poly = {m: v for m, v in _diff(left, right).items()}
        if set(poly) - {(), key}:
            return False
        a = -poly.get(key, 0)
        q = a - poly.get((), 0)
        return a > 0 and q > 0

    sp = _split_phi(c, test)
    if sp is None:
        return None

    def premise(n):
        e_n = e_conj([e_disj([EAtom(x, Const(x, i)) for i in range(1, n + 1)]) for x in xs])
        return _replace(c, p, Prob(e_n, ETop()))
    return premise


def _diff(a, b):
    pa, pb = term_poly(a), term_poly(b)
    out = dict(pa)
    for m, v in pb.items():
        out[m] = out.get(m, 0) - v
    return {m: v for m, v in out.items() if v}


def sumupper_family(c):
    """Premise (n, rgs) of SumUpper for ``[phi ->] sum x . t <= t'``."""
    sp = _split_phi(c, lambda b: isinstance(b, Geq) and isinstance(b.right, Sum))
    if sp is None:
        return None
    phi, body = sp
    t2, s = body.left, body.right
    x = s.bound

    def premise(n, rgs):
        cs = [Const(x.var, i) for i in range(1, n + 1)]
        blocks = {}
        for c_, b in zip(cs, rgs):
            blocks.setdefault(b, []).append(c_)
        lits = []
        for i in range(n):
            for j in range(i + 1, n):
                e = Eq(cs[i], cs[j])
                lits.append(e if rgs[i] == rgs[j] else Not(e))
        parts = []
        for b in sorted(blocks):
            eps = e_disj([EAtom(x.var, c_) for c_ in blocks[b]])
            part = substitute_event(s.body, x.var, x, eps)
            if x in free_vars(part):
                raise FormulaError(f"{show(x)} occurs outside events of the summand")
            parts.append(part)
        inner = Geq(t2, add_all(parts))
        return _wrap(phi, implies(conj(lits), inner) if lits else inner)
    return premise


def sumupper_indices(n_top: int):
    for n in range(1, n_top + 1):
        for rgs in restricted_growth_strings(n):
            yield (n, rgs)


# ---------------------------------------------------------------------------
# the checker


class Checker:
    def __init__(self, system: System, hypotheses=(), n_max: int = 64, generators=None):
        self.system = system
        self.hyps = tuple(hypotheses)
        self.n_max = n_max
        if generators is None:
            from .generators import REGISTRY
            generators = REGISTRY
        self.generators = generators
        self.bounded = []

    # entry point ----------------------------------------------------------

    def check(self, nodes, goal=None) -> Verdict:
        try:
            for k, h in enumerate(self.hyps, 1):
                why = admissible(h, self.system)
                if why:
                    raise _Reject(f"hyp {k}", "Hyp", why)
            env = self.check_nodes(nodes, {}, {})
            if goal is not None:
                if not nodes or nodes[-1].formula != goal:
                    last = nodes[-1].label if nodes else None
                    raise _Reject(last, "goal", "last node does not match the goal")
            del env
        except _Reject as r:
            return Verdict(REJECTED, r.node, r.rule, r.reason)
        if self.bounded:
            return Verdict(BOUNDED, bounded=tuple(self.bounded))
        return Verdict(VERIFIED)

    def check_nodes(self, nodes, env: dict, deps: dict, prefix: str = "") -> dict:
        """Check nodes in order; ``env`` maps visible labels to nodes."""
        env = dict(env)
        for node in nodes:
            lab = prefix + node.label
            if node.label in env:
                raise _Reject(lab, "-", "duplicate label")
            why = admissible(node.formula, self.system)
            if why:
                raise _Reject(lab, _rule_name(node.just), why)
            deps[node.label] = self._check_node(node, env, deps, lab)
            env[node.label] = node
        return env

    def _check_node(self, node, env, deps, lab) -> frozenset:
        j = node.just
        f = node.formula
        if isinstance(j, Hyp):
            if not 1 <= j.index <= len(self.hyps):
                raise _Reject(lab, "Hyp", f"no hypothesis {j.index}")
            if self.hyps[j.index - 1] != f:
                raise _Reject(lab, "Hyp", f"formula differs from hypothesis {j.index}")
            return frozenset({j.index})
        if isinstance(j, Axiom):
            name = j.schema
            if not name.startswith("PolyBase:") and name not in self.system.axioms():
                raise _Reject(lab, name, f"axiom {name} is not part of {self.system.name}")
            why = check_axiom_instance(f, name, self.system.n, j.args)
            if why:
                raise _Reject(lab, name, why)
            return frozenset()
        if isinstance(j, Rule):
            if j.name not in self.system.rules() or j.name == "Deduction":
                raise _Reject(lab, j.name, f"rule {j.name} is not part of {self.system.name}")
            for p in j.premises:
                if p not in env:
                    raise _Reject(lab, j.name, f"premise {p} is not an earlier node")
            prem = [env[p].formula for p in j.premises]
            getattr(self, "_rule_" + j.name)(f, prem, j, lab)
            if j.generator is not None:
                return frozenset(range(1, len(self.hyps) + 1))
            out = frozenset()
            for p in j.premises:
                out |= deps[p]
            return out
        if isinstance(j, Deduction):
            return self._deduction(node, env, deps, lab)
        raise _Reject(lab, "-", f"unknown justification {j!r}")

    # generators -------------------------------------------------------------

    def _generated(self, j, lab, indices, expected):
        gen = self.generators.get(j.generator)
        if gen is None:
            raise _Reject(lab, j.name, f"unknown generator {j.generator!r}")
        for idx in indices:
            try:
                sub = list(gen(idx))
            except Exception as exc:  # generator bugs become rejections
                raise _Reject(lab, j.name, f"generator failed at {idx}: {exc}") from None
            if not sub:
                raise _Reject(lab, j.name, f"generator gave no proof for {idx}")
            self.check_nodes(sub, {}, {}, prefix=f"{lab}[{idx}]/")
            if sub[-1].formula != expected(idx):
                raise _Reject(lab, j.name, f"generated premise {idx} has the wrong formula")

    def _explicit(self, j, lab, prem, expected: list):
        want = set(expected)
        got = set(prem)
        if want - got:
            missing = len(want - got)
            raise _Reject(lab, j.name, f"{missing} of {len(want)} required premises missing")
        if got - want:
            raise _Reject(lab, j.name, "premise not in the rule's premise family")

    # rules --------------------------------------------------------------------

    def _rule_MP(self, f, prem, j, lab):
        if len(prem) != 2:
            raise _Reject(lab, "MP", "MP takes two premises")
        a, b = prem
        if b == implies(a, f) or a == implies(b, f):
            return
        raise _Reject(lab, "MP", "premises are not phi and phi -> conclusion")

    def _infinitary(self, f, prem, j, lab, family, what):
        fam = family(f)
        if fam is None:
            raise _Reject(lab, j.name, f"conclusion does not have the {what} shape")
        if j.generator is None:
            have = len(prem)
            raise _Reject(lab, j.name,
                          f"missing premises: {j.name} needs one for every n >= 1 "
                          f"(given {have}); supply a generator")
        self._generated(j, lab, range(1, self.n_max + 1), fam)
        self.bounded.append((lab, j.name, self.n_max))

    def _rule_Conv(self, f, prem, j, lab):
        self._infinitary(f, prem, j, lab, conv_family, "[phi ->] t <= 0")

    def _rule_Fin(self, f, prem, j, lab):
        self._infinitary(f, prem, j, lab, fin_family, "[phi ->] sum x . P(true) < 0")

    def _bounded_family(self, f, prem, j, lab, indices_full, indices_gen, expected):
        if self.system.n is not None:
            idx = list(indices_full)
            if j.generator is not None:
                self._generated(j, lab, idx, expected)
            else:
                self._explicit(j, lab, prem, [expected(i) for i in idx])
            return
        if j.generator is None:
            raise _Reject(lab, j.name, f"missing premises: {j.name} is infinitary over an "
                          "unbounded signature; supply a generator")
        self._generated(j, lab, indices_gen, expected)
        self.bounded.append((lab, j.name, self.n_max))

    def _rule_Unity(self, f, prem, j, lab):
        fam = unity_family(f)
        if fam is None:
            raise _Reject(lab, "Unity", "conclusion is not [phi ->] 1 - P(E*) > q with q > 0")
        n = self.system.n
        self._bounded_family(f, prem, j, lab, range(1, (n or 0) + 1),
                             range(1, self.n_max + 1), fam)

    def _rule_SumUpper(self, f, prem, j, lab):
        fam = sumupper_family(f)
        if fam is None:
            raise _Reject(lab, "SumUpper", "conclusion is not [phi ->] t' >= sum x . t")
        n = self.system.n
        cap = min(self.n_max, SUMUPPER_GENERATOR_CAP)
        try:
            self._bounded_family(f, prem, j, lab, sumupper_indices(n or 0),
                                 sumupper_indices(cap), lambda k: fam(*k))
        except FormulaError as exc:
            raise _Reject(lab, "SumUpper", str(exc)) from None

    def _rule_FreeElim(self, f, prem, j, lab):
        if len(prem) != 1:
            raise _Reject(lab, "FreeElim", "FreeElim takes one premise")
        p = prem[0]
        for v in sorted(free_vars(p)):
            for c in sorted(x for x in iter_nodes(f) if isinstance(x, Const) and x.var == v.var):
                if substitute_range_var(p, v, c) == f:
                    return
        raise _Reject(lab, "FreeElim", "conclusion is not premise[v/c] for a free v")

    def _rule_FreeIntro(self, f, prem, j, lab):
        fv = sorted(free_vars(f))
        if not fv:
            raise _Reject(lab, "FreeIntro", "conclusion has no free range variable")
        n = self.system.n
        last = None
        for v in fv:
            def expected(i, v=v):
                return substitute_range_var(f, v, Const(v.var, i))
            try:
                self._bounded_family(f, prem, j, lab, range(1, (n or 0) + 1),
                                     range(1, self.n_max + 1), expected)
                return
            except _Reject as r:
                last = r
        raise last

    # deduction ------------------------------------------------------------------

    def _deduction(self, node, env, deps, lab) -> frozenset:
        j = node.just
        if "Deduction" not in self.system.rules():
            raise _Reject(lab, "Deduction", "not available")
        if j.source not in env:
            raise _Reject(lab, "Deduction", f"{j.source} is not an earlier node")
        if not 1 <= j.discharge <= len(self.hyps):
            raise _Reject(lab, "Deduction", f"no hypothesis {j.discharge}")
        phi = self.hyps[j.discharge - 1]
        psi = env[j.source].formula
        if node.formula != implies(phi, psi):
            raise _Reject(lab, "Deduction", "conclusion is not hypothesis -> source")
        if free_vars(phi) or free_vars(psi):
            raise _Reject(lab, "Deduction", "the deduction theorem only holds for closed "
                          "formulas; free variables are read universally")
        new = _discharge(env, deps, j.source, j.discharge, phi, lab)
        self.check_nodes(new, env, dict(deps), prefix="")
        if new[-1].formula != node.formula:
            raise _Reject(lab, "Deduction", "internal: discharge produced another formula")
        return deps[j.source] - {j.discharge}


def _rule_name(j) -> str:
    if isinstance(j, Axiom):
        return j.schema
    if isinstance(j, Rule):
        return j.name
    if isinstance(j, Deduction):
        return "Deduction"
    return "Hyp"


def _discharge(env, deps, target, k, phi, lab) -> list:
    """Rewrite the derivation of ``target`` into one of phi -> target without
    hypothesis ``k``; only MP, axioms and hypotheses may depend on it."""
    out = []
    memo = {}
    tag = f"{lab}~"

    def emit(formula, just):
        label = f"{tag}{len(out)}"
        out.append(Node(label, formula, just))
        return label

    def go(label):
        if label in memo:
            return memo[label]
        node = env[label]
        psi = node.formula
        if k not in deps[label]:
            t = emit(implies(psi, implies(phi, psi)), Axiom("PolyBase:Taut"))
            res = emit(implies(phi, psi), Rule("MP", (label, t)))
        elif isinstance(node.just, Hyp):
            res = emit(implies(phi, phi), Axiom("PolyBase:Taut"))
        elif isinstance(node.just, Rule) and node.just.name == "MP" and not node.just.generator:
            a, b = node.just.premises
            if env[b].formula != implies(env[a].formula, psi):
                a, b = b, a
            ia, ib = go(a), go(b)
            chi = env[a].formula
            t = emit(implies(implies(phi, chi),
                             implies(implies(phi, implies(chi, psi)), implies(phi, psi))),
                     Axiom("PolyBase:Taut"))
            m1 = emit(implies(implies(phi, implies(chi, psi)), implies(phi, psi)),
                      Rule("MP", (ia, t)))
            res = emit(implies(phi, psi), Rule("MP", (ib, m1)))
        else:
            raise _Reject(lab, "Deduction",
                          f"{label} uses {_rule_name(node.just)} on the discharged hypothesis; "
                          "only MP chains can be discharged")
        memo[label] = res
        return res

    go(target)
    return out


def check_proof(proof: Proof, system: System | None = None, hypotheses=None,
                n_max: int = 64, generators=None) -> Verdict:
    system = system or proof.system
    hyps = proof.hypotheses if hypotheses is None else hypotheses
    return Checker(system, hyps, n_max, generators).check(proof.nodes, proof.goal)
