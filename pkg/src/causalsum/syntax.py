"""Abstract syntax for probabilistic and causal formulas with summation.

Events (the base languages) live inside probability operators. Terms are
polynomials over probabilities, possibly with formal sums over range
variables. Formulas compare terms and test equality of symbols.

Only the primitive grammar is represented here: disjunction, implication,
approximate equality and rational numerals are expanded by the builders at the
bottom of the module (and by the parser, which uses them).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Union


class FormulaError(ValueError):
    """Ill-formed syntax object (wrong symbol kind, nested box, ...)."""


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True, slots=True, order=True)
class Const:
    """Constant symbol c^V_i."""

    var: str
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise FormulaError(f"constant index must be >= 1, got {self.index}")

    def __str__(self):
        return show_symbol(self)


@dataclass(frozen=True, slots=True, order=True)
class RVar:
    """Range variable v_i of random variable V."""

    var: str
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise FormulaError(f"range variable index must be >= 1, got {self.index}")

    def __str__(self):
        return show_symbol(self)


Symbol = Union[Const, RVar]


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True, slots=True)
class ETop:
    def __str__(self):
        return show_event(self)


@dataclass(frozen=True, slots=True)
class EAtom:
    var: str
    value: Symbol

    def __post_init__(self):
        if self.value.var != self.var:
            raise FormulaError(
                f"symbol {show_symbol(self.value)} does not belong to variable {self.var}")

    def __str__(self):
        return show_event(self)


@dataclass(frozen=True, slots=True)
class ENot:
    arg: "Event"

    def __str__(self):
        return show_event(self)


@dataclass(frozen=True, slots=True)
class EAnd:
    left: "Event"
    right: "Event"

    def __str__(self):
        return show_event(self)


@dataclass(frozen=True, slots=True)
class Box:
    """[intervention] body: body holds after the intervention is applied."""

    intervention: "Event"
    body: "Event"

    def __post_init__(self):
        if not is_int_formula(self.intervention):
            raise FormulaError("intervention must be a conjunction of atoms or true")
        if has_box(self.body):
            raise FormulaError("nested interventions are not part of the language")

    def __str__(self):
        return show_event(self)


Event = Union[ETop, EAtom, ENot, EAnd, Box]


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True, slots=True)
class Prob:
    event: Event
    cond: Event = ETop()

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class Sum:
    bound: RVar
    body: "Term"

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class Add:
    left: "Term"
    right: "Term"

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class Mul:
    left: "Term"
    right: "Term"

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class Neg:
    arg: "Term"

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class ConstSym:
    sym: Const

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class RangeSym:
    sym: RVar

    def __str__(self):
        return show_term(self)


# Macro-level nodes produced by the parser before numerals and division are
# cleared. They never appear in a Formula.
@dataclass(frozen=True, slots=True)
class Num:
    value: Fraction

    def __str__(self):
        return show_term(self)


@dataclass(frozen=True, slots=True)
class Div:
    num: "Term"
    den: "Term"

    def __str__(self):
        return show_term(self)


Term = Union[Prob, Sum, Add, Mul, Neg, ConstSym, RangeSym]


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True, slots=True)
class Eq:
    left: Symbol
    right: Symbol

    def __post_init__(self):
        if self.left.var != self.right.var:
            raise FormulaError(
                f"cross-variable equality {show_symbol(self.left)} ~ {show_symbol(self.right)}")

    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True, slots=True)
class Geq:
    left: Term
    right: Term

    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"

    def __str__(self):
        return show_formula(self)


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return show_formula(self)


Formula = Union[Eq, Geq, Not, And]


@dataclass(frozen=True, slots=True)
class Sequent:
    premises: tuple
    conclusion: Formula

    def __str__(self):
        return show_sequent(self)


@dataclass(frozen=True)
class Signature:
    """Random variables plus the constant regime.

    ``n_constants`` is None for the unbounded signature and N for Bounded(N).
    """

    variables: tuple
    n_constants: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.n_constants is not None and self.n_constants < 1:
            raise FormulaError("Bounded(N) requires N >= 1")
        if len(set(self.variables)) != len(self.variables):
            raise FormulaError("duplicate variable names")
        lowered = [v.lower() for v in self.variables]
        if len(set(lowered)) != len(lowered):
            raise FormulaError("variable names must stay distinct when lowercased")
        for v in self.variables:
            if not v[:1].isupper() or v == "P":
                raise FormulaError(f"bad variable name {v!r}")

    @property
    def bounded(self) -> bool:
        return self.n_constants is not None

    def constants(self, var: str) -> list:
        if self.n_constants is None:
            raise FormulaError("unbounded signature has no finite constant list")
        return [Const(var, i) for i in range(1, self.n_constants + 1)]


# ---------------------------------------------------------------------------
# predicates on events


def is_int_formula(e) -> bool:
    if isinstance(e, (ETop, EAtom)):
        return True
    if isinstance(e, EAnd):
        return is_int_formula(e.left) and is_int_formula(e.right)
    return False


def has_box(e) -> bool:
    if isinstance(e, Box):
        return True
    if isinstance(e, ENot):
        return has_box(e.arg)
    if isinstance(e, EAnd):
        return has_box(e.left) or has_box(e.right)
    return False


def conjuncts(e) -> list:
    """Flatten nested EAnd (events) or And (formulas)."""
    if isinstance(e, (EAnd, And)):
        return conjuncts(e.left) + conjuncts(e.right)
    return [e]


def is_cond_formula(e) -> bool:
    """Membership in L_cond: true, or a conjunction of literals with at most
    one literal per random variable."""
    if isinstance(e, ETop):
        return True
    seen = set()
    for lit in conjuncts(e):
        atom = lit.arg if isinstance(lit, ENot) else lit
        if not isinstance(atom, EAtom):
            return False
        if atom.var in seen:
            return False
        seen.add(atom.var)
    return True


def int_assignments(e) -> list:
    """Atoms of an intervention formula as (var, symbol) pairs, in order."""
    if isinstance(e, ETop):
        return []
    if isinstance(e, EAtom):
        return [(e.var, e.value)]
    if isinstance(e, EAnd):
        return int_assignments(e.left) + int_assignments(e.right)
    raise FormulaError("not an intervention formula")


# ---------------------------------------------------------------------------
# printing


def range_var_name(var: str, index: int) -> str:
    base = var.lower()
    if base[-1].isdigit() or base == "c":
        return f"{base}_{index}"
    return f"{base}{index}"


def show_symbol(s, in_event: bool = False) -> str:
    if isinstance(s, Const):
        return f"c{s.index}" if in_event else f"c{s.index}@{s.var}"
    return range_var_name(s.var, s.index)


def _show_int(e) -> str:
    if isinstance(e, ETop):
        return "true"
    if isinstance(e, EAtom):
        return f"{e.var}={show_symbol(e.value, True)}"
    # left-nested chains print flat, right-nested ones keep their parens
    left = _show_int(e.left)
    right = _show_int(e.right)
    if isinstance(e.right, EAnd):
        right = f"({right})"
    return f"{left} & {right}"


def _event_unit(e) -> str:
    s = show_event(e)
    return f"({s})" if isinstance(e, Box) else s


def show_event(e) -> str:
    if isinstance(e, ETop):
        return "true"
    if isinstance(e, EAtom):
        return f"{e.var}={show_symbol(e.value, True)}"
    if isinstance(e, ENot):
        if isinstance(e.arg, ETop):
            return "false"
        return "!" + _event_unit(e.arg)
    if isinstance(e, EAnd):
        return f"({show_event(e.left)} & {show_event(e.right)})"
    if isinstance(e, Box):
        return f"[{_show_int(e.intervention)}] {_event_unit(e.body)}"
    raise FormulaError(f"not an event: {e!r}")


def show_term(t) -> str:
    if isinstance(t, Prob):
        if isinstance(t.cond, ETop):
            return f"P({show_event(t.event)})"
        return f"P({show_event(t.event)} | {show_event(t.cond)})"
    if isinstance(t, Sum):
        return f"(sum {show_symbol(t.bound)} . {show_term(t.body)})"
    if isinstance(t, Add):
        return f"({show_term(t.left)} + {show_term(t.right)})"
    if isinstance(t, Mul):
        return f"({show_term(t.left)} * {show_term(t.right)})"
    if isinstance(t, Neg):
        return "-" + show_term(t.arg)
    if isinstance(t, ConstSym):
        return show_symbol(t.sym)
    if isinstance(t, RangeSym):
        return show_symbol(t.sym)
    if isinstance(t, Num):
        return str(t.value) if t.value >= 0 else f"-{-t.value}"
    if isinstance(t, Div):
        return f"({show_term(t.num)} / {show_term(t.den)})"
    raise FormulaError(f"not a term: {t!r}")


def show_formula(f) -> str:
    if isinstance(f, Eq):
        return f"{show_symbol(f.left)} ~ {show_symbol(f.right)}"
    if isinstance(f, Geq):
        return f"{show_term(f.left)} >= {show_term(f.right)}"
    if isinstance(f, Not):
        inner = show_formula(f.arg)
        if isinstance(f.arg, (Eq, Geq)):
            inner = f"({inner})"
        return "!" + inner
    if isinstance(f, And):
        return f"({show_formula(f.left)} & {show_formula(f.right)})"
    raise FormulaError(f"not a formula: {f!r}")


def show_sequent(s: Sequent) -> str:
    prem = "; ".join(show_formula(p) for p in s.premises)
    return f"{prem} |- {show_formula(s.conclusion)}" if prem else f"|- {show_formula(s.conclusion)}"


def show(node) -> str:
    if isinstance(node, Sequent):
        return show_sequent(node)
    if isinstance(node, (Eq, Geq, Not, And)):
        return show_formula(node)
    if isinstance(node, (ETop, EAtom, ENot, EAnd, Box)):
        return show_event(node)
    if isinstance(node, (Const, RVar)):
        return show_symbol(node)
    return show_term(node)


# ---------------------------------------------------------------------------
# traversal


def iter_nodes(node) -> Iterator:
    """Pre-order walk over every syntax node, symbols included."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, (Eq,)):
            stack.extend((n.right, n.left))
        elif isinstance(n, (Geq, And, EAnd, Add, Mul, Div)):
            stack.extend((n.right, n.left))
        elif isinstance(n, (Not, ENot, Neg)):
            stack.append(n.arg)
        elif isinstance(n, Box):
            stack.extend((n.body, n.intervention))
        elif isinstance(n, EAtom):
            stack.append(n.value)
        elif isinstance(n, Prob):
            stack.extend((n.cond, n.event))
        elif isinstance(n, Sum):
            stack.extend((n.body, n.bound))
        elif isinstance(n, (ConstSym, RangeSym)):
            stack.append(n.sym)
        elif isinstance(n, Sequent):
            stack.append(n.conclusion)
            stack.extend(reversed(n.premises))


def size(node) -> int:
    return sum(1 for n in iter_nodes(node) if not isinstance(n, (Const, RVar)))


def sum_depth(node) -> int:
    if isinstance(node, Sum):
        return 1 + sum_depth(node.body)
    if isinstance(node, (Geq, And, Add, Mul, Div)):
        return max(sum_depth(node.left), sum_depth(node.right))
    if isinstance(node, (Not, Neg)):
        return sum_depth(node.arg)
    return 0


def free_vars(node) -> frozenset:
    """Free range variables of a formula, term or event."""
    if isinstance(node, RVar):
        return frozenset((node,))
    if isinstance(node, Const) or isinstance(node, (ETop, ConstSym, Num)):
        return frozenset()
    if isinstance(node, RangeSym):
        return frozenset((node.sym,))
    if isinstance(node, EAtom):
        return free_vars(node.value)
    if isinstance(node, Sum):
        return free_vars(node.body) - {node.bound}
    if isinstance(node, Sequent):
        out = free_vars(node.conclusion)
        for p in node.premises:
            out |= free_vars(p)
        return out
    out = frozenset()
    for child in _children(node):
        out |= free_vars(child)
    return out


def _children(node) -> tuple:
    if isinstance(node, (Eq, Geq, And, EAnd, Add, Mul, Div)):
        return (node.left, node.right)
    if isinstance(node, (Not, ENot, Neg)):
        return (node.arg,)
    if isinstance(node, Box):
        return (node.intervention, node.body)
    if isinstance(node, Prob):
        return (node.event, node.cond)
    if isinstance(node, EAtom):
        return (node.value,)
    return ()


def constants_in(node) -> set:
    return {n for n in iter_nodes(node) if isinstance(n, Const)}


def variables_in(node) -> set:
    out = set()
    for n in iter_nodes(node):
        if isinstance(n, (Const, RVar)):
            out.add(n.var)
        elif isinstance(n, EAtom):
            out.add(n.var)
    return out


def interventions_in(node) -> list:
    """Distinct intervention formulas in order of first occurrence."""
    seen = []
    for n in iter_nodes(node):
        if isinstance(n, Box) and n.intervention not in seen:
            seen.append(n.intervention)
    return seen


# ---------------------------------------------------------------------------
# substitution


def _fresh(var: str, avoid: Iterable) -> RVar:
    used = [s.index for s in avoid if isinstance(s, RVar) and s.var == var]
    return RVar(var, max(used, default=0) + 1)


def _all_rvars(node) -> set:
    return {n for n in iter_nodes(node) if isinstance(n, RVar)}


def substitute_range_var(node, v: RVar, d: Symbol):
    """Replace free occurrences of ``v`` by ``d`` (capture-avoiding)."""
    if not isinstance(v, RVar):
        raise FormulaError("only range variables can be substituted")
    if d.var != v.var:
        raise FormulaError(
            f"cannot substitute {show_symbol(d)} for {show_symbol(v)}: different variables")
    return _subst(node, v, d)


def _subst(n, v, d):
    if isinstance(n, RVar):
        return d if n == v else n
    if isinstance(n, (Const, ETop, Num)):
        return n
    if isinstance(n, EAtom):
        return EAtom(n.var, _subst(n.value, v, d)) if n.value == v else n
    if isinstance(n, RangeSym):
        return RangeSym(d) if n.sym == v and isinstance(d, RVar) else (
            ConstSym(d) if n.sym == v else n)
    if isinstance(n, Eq):
        return Eq(_subst(n.left, v, d), _subst(n.right, v, d))
    if isinstance(n, Sum):
        if n.bound == v or v not in free_vars(n.body):
            return n
        if n.bound == d:
            fresh = _fresh(n.bound.var, _all_rvars(n.body) | {d, v})
            body = _subst(n.body, n.bound, fresh)
            return Sum(fresh, _subst(body, v, d))
        return Sum(n.bound, _subst(n.body, v, d))
    return _rebuild(n, lambda c: _subst(c, v, d))


def _rebuild(n, f):
    if isinstance(n, Geq):
        return Geq(f(n.left), f(n.right))
    if isinstance(n, Not):
        return Not(f(n.arg))
    if isinstance(n, And):
        return And(f(n.left), f(n.right))
    if isinstance(n, Prob):
        return Prob(f(n.event), f(n.cond))
    if isinstance(n, Add):
        return Add(f(n.left), f(n.right))
    if isinstance(n, Mul):
        return Mul(f(n.left), f(n.right))
    if isinstance(n, Div):
        return Div(f(n.num), f(n.den))
    if isinstance(n, Neg):
        return Neg(f(n.arg))
    if isinstance(n, ENot):
        return ENot(f(n.arg))
    if isinstance(n, EAnd):
        return EAnd(f(n.left), f(n.right))
    if isinstance(n, Box):
        return Box(f(n.intervention), f(n.body))
    if isinstance(n, Sequent):
        return Sequent(tuple(f(p) for p in n.premises), f(n.conclusion))
    return n


def substitute_event(node, var: str, v: Symbol, eps):
    """Replace every free atom ``var=v`` inside probability operators by ``eps``.

    Occurrences inside an intervention can only be replaced by an atom.
    """
    return _subst_event(node, EAtom(var, v), eps, free_vars(eps))


def _subst_event(n, atom, eps, eps_free):
    if isinstance(n, EAtom):
        return eps if n == atom else n
    if isinstance(n, Box):
        interv = n.intervention
        if any(a == atom for a in iter_nodes(interv)):
            if not isinstance(eps, EAtom):
                raise FormulaError("cannot place a compound event inside an intervention")
            interv = _subst_event(interv, atom, eps, eps_free)
        return Box(interv, _subst_event(n.body, atom, eps, eps_free))
    if isinstance(n, Sum):
        v = atom.value
        if isinstance(v, RVar) and n.bound == v:
            return n
        if n.bound in eps_free:
            fresh = _fresh(n.bound.var, _all_rvars(n.body) | eps_free | {n.bound})
            n = Sum(fresh, _subst(n.body, n.bound, fresh))
        return Sum(n.bound, _subst_event(n.body, atom, eps, eps_free))
    if isinstance(n, (Eq, RVar, Const, ETop, ConstSym, RangeSym, Num)):
        return n
    return _rebuild(n, lambda c: _subst_event(c, atom, eps, eps_free))


# ---------------------------------------------------------------------------
# fragments


@dataclass(frozen=True)
class Fragment:
    causal: bool
    closed: bool
    circle: bool
    max_constant: int
    cond_guarded: bool

    def bounded(self, n: int) -> bool:
        return self.max_constant <= n


def classify_fragment(node) -> Fragment:
    causal = False
    circle = True
    guarded = True
    max_c = 0
    for n in iter_nodes(node):
        if isinstance(n, Box):
            causal = True
        elif isinstance(n, (Neg, ConstSym, RangeSym)):
            circle = False
        elif isinstance(n, Const):
            max_c = max(max_c, n.index)
        elif isinstance(n, Prob) and not is_cond_formula(n.cond):
            guarded = False
    return Fragment(causal, not free_vars(node), circle, max_c, guarded)


# ---------------------------------------------------------------------------
# builders for the derived notation


TOP = ETop()
BOT = ENot(ETop())


def zero():
    return Prob(BOT, TOP)


def one():
    return Prob(TOP, TOP)


def numeral(n: int):
    """n as a left-associated sum of n copies of P(true); 0 is P(false)."""
    if n < 0:
        return Neg(numeral(-n))
    if n == 0:
        return zero()
    t = one()
    for _ in range(n - 1):
        t = Add(t, one())
    return t


def numeral_value(t) -> int | None:
    """Inverse of :func:`numeral` on natural numerals, else None."""
    if t == zero():
        return 0
    k = 0
    while isinstance(t, Add):
        if t.right != one():
            return None
        k += 1
        t = t.left
    return k + 1 if t == one() else None


def e_or(a, b):
    return ENot(EAnd(ENot(a), ENot(b)))


def e_conj(items):
    items = list(items)
    if not items:
        return TOP
    out = items[0]
    for x in items[1:]:
        out = EAnd(out, x)
    return out


def e_disj(items):
    items = list(items)
    if not items:
        return BOT
    out = items[0]
    for x in items[1:]:
        out = e_or(out, x)
    return out


def or_(a, b):
    return Not(And(Not(a), Not(b)))


def implies(a, b):
    return Not(And(a, Not(b)))


def iff(a, b):
    return And(implies(a, b), implies(b, a))


def approx(t1, t2):
    return And(Geq(t1, t2), Geq(t2, t1))


def gt(t1, t2):
    return And(Geq(t1, t2), Not(Geq(t2, t1)))


def leq(t1, t2):
    return Geq(t2, t1)


def lt(t1, t2):
    return gt(t2, t1)


def true_formula():
    return Geq(zero(), zero())


def false_formula():
    return Not(true_formula())


def conj(items):
    items = list(items)
    if not items:
        return true_formula()
    out = items[0]
    for x in items[1:]:
        out = And(out, x)
    return out


def disj(items):
    items = list(items)
    if not items:
        return false_formula()
    out = items[0]
    for x in items[1:]:
        out = or_(out, x)
    return out


def add_all(items):
    items = list(items)
    if not items:
        return zero()
    out = items[0]
    for x in items[1:]:
        out = Add(out, x)
    return out


def sub(a, b):
    return Add(a, Neg(b))


def mul(a, b):
    """Multiply, treating None as the unit denominator."""
    if a is None:
        return b
    if b is None:
        return a
    return Mul(a, b)


def prob(event, cond=TOP):
    return Prob(event, cond)


def rename_constants(node, mapping):
    """Replace constants by ``mapping[c]`` (missing keys are kept)."""

    def go(n):
        if isinstance(n, Const):
            return mapping.get(n, n)
        if isinstance(n, (RVar, ETop, Num)):
            return n
        if isinstance(n, EAtom):
            return EAtom(n.var, go(n.value))
        if isinstance(n, Eq):
            return Eq(go(n.left), go(n.right))
        if isinstance(n, ConstSym):
            return ConstSym(go(n.sym))
        if isinstance(n, RangeSym):
            return n
        if isinstance(n, Sum):
            return Sum(n.bound, go(n.body))
        return _rebuild(n, go)

    return go(node)
