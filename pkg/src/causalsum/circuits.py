"""Boolean circuits that compute ETR parse trees, and the trees themselves.

A circuit with ``w`` inputs answers one query per address. Its output is a
fixed-width record, most significant bit first::

    label (8) | parent (w) | child0 (w) | child1 (w)

An all-ones pointer is null. The root lives at address 0. Label bytes:

    0        no node at this address
    1..9     +  *  neg  =  <=  <  and  or  not
    16..127  variable x_(b-16)
    128..255 integer constant b-192, so -64..63

Input ``i`` of a circuit is bit ``i`` of the address counting from the most
significant end.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .constraints import (
    ConstraintSystem, Poly, SolveResult, atom, b_and, b_not, b_or, solve_constraints_small,
)


class CircuitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# netlists

_GATE = re.compile(r"^g(\d+)\s*=\s*(AND|OR|NOT)\s+(.*)$")
_REF = re.compile(r"^g(\d+)$")


@dataclass(frozen=True)
class BooleanCircuit:
    """Gates ``0..inputs-1`` are the inputs; the rest map index -> (op, operands)."""

    inputs: int
    gates: dict
    outputs: tuple
    order: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.inputs < 0:
            raise CircuitError("negative input count")
        for g, (op, args) in self.gates.items():
            if g < self.inputs:
                raise CircuitError(f"g{g} redefines an input")
            want = 1 if op == "NOT" else 2
            if op not in ("AND", "OR", "NOT") or len(args) != want:
                raise CircuitError(f"g{g}: {op} takes {want} operand(s), got {len(args)}")
            for a in args:
                if not self._known(a):
                    raise CircuitError(f"g{g} reads undefined gate g{a}")
        for o in self.outputs:
            if not self._known(o):
                raise CircuitError(f"output g{o} is undefined")
        object.__setattr__(self, "order", self._topo())

    def _known(self, g):
        return 0 <= g < self.inputs or g in self.gates

    def _topo(self):
        done, busy, out = set(range(self.inputs)), set(), []
        for start in sorted(self.gates):
            stack = [(start, False)]
            while stack:
                g, expanded = stack.pop()
                if g in done:
                    continue
                if expanded:
                    busy.discard(g)
                    done.add(g)
                    out.append(g)
                    continue
                if g in busy:
                    raise CircuitError(f"cycle through g{g}")
                busy.add(g)
                stack.append((g, True))
                for a in self.gates[g][1]:
                    if a not in done:
                        if a in busy:
                            raise CircuitError(f"cycle through g{a}")
                        stack.append((a, False))
        return tuple(out)

    @property
    def size(self) -> int:
        return len(self.gates)


def parse_netlist(text: str) -> BooleanCircuit:
    n, gates, outputs = None, {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("inputs"):
            try:
                n = int(line.split()[1])
            except (IndexError, ValueError):
                raise CircuitError(f"line {no}: expected 'inputs <N>'") from None
            continue
        if line.startswith("outputs"):
            outputs = tuple(_ref(w, no) for w in line.split()[1:])
            continue
        m = _GATE.match(line)
        if not m:
            raise CircuitError(f"line {no}: cannot read {line!r}")
        g = int(m.group(1))
        if g in gates:
            raise CircuitError(f"line {no}: g{g} defined twice")
        gates[g] = (m.group(2), tuple(_ref(w, no) for w in m.group(3).split()))
    if n is None:
        raise CircuitError("missing 'inputs' line")
    if outputs is None:
        raise CircuitError("missing 'outputs' line")
    return BooleanCircuit(n, gates, outputs)


def _ref(word, no):
    m = _REF.match(word)
    if not m:
        raise CircuitError(f"line {no}: bad gate reference {word!r}")
    return int(m.group(1))


def format_netlist(c: BooleanCircuit) -> str:
    out = [f"inputs {c.inputs}"]
    for g in c.order:
        op, args = c.gates[g]
        out.append(f"g{g} = {op} " + " ".join(f"g{a}" for a in args))
    out.append("outputs " + " ".join(f"g{o}" for o in c.outputs))
    return "\n".join(out) + "\n"


def load_netlist(path) -> BooleanCircuit:
    return parse_netlist(Path(path).read_text())


def _bits(x) -> tuple:
    if isinstance(x, str):
        if set(x) - {"0", "1"}:
            raise CircuitError(f"not a bit string: {x!r}")
        return tuple(ch == "1" for ch in x)
    return tuple(bool(b) for b in x)


def eval_circuit(c: BooleanCircuit, bits) -> str:
    bits = _bits(bits)
    if len(bits) != c.inputs:
        raise CircuitError(f"expected {c.inputs} input bits, got {len(bits)}")
    val = dict(enumerate(bits))
    for g in c.order:
        op, args = c.gates[g]
        if op == "NOT":
            val[g] = not val[args[0]]
        elif op == "AND":
            val[g] = val[args[0]] and val[args[1]]
        else:
            val[g] = val[args[0]] or val[args[1]]
    return "".join("1" if val[o] else "0" for o in c.outputs)


# ---------------------------------------------------------------------------
# ETR trees

OPS = ("+", "*", "neg", "=", "<=", "<", "and", "or", "not")
ARITY = {"+": 2, "*": 2, "neg": 1, "=": 2, "<=": 2, "<": 2, "and": 2, "or": 2, "not": 1}
CONST_MIN, CONST_MAX = -64, 63
MAX_VAR = 111


def label_byte(label) -> int:
    kind = label[0]
    if kind == "var":
        if not 0 <= label[1] <= MAX_VAR:
            raise CircuitError(f"variable index {label[1]} out of 0..{MAX_VAR}")
        return 16 + label[1]
    if kind == "const":
        if not CONST_MIN <= label[1] <= CONST_MAX:
            raise CircuitError(f"constant {label[1]} out of {CONST_MIN}..{CONST_MAX}")
        return label[1] + 192
    return 1 + OPS.index(kind)


def label_from_byte(b: int):
    if b == 0:
        return None
    if 1 <= b <= len(OPS):
        return (OPS[b - 1],)
    if 16 <= b <= 127:
        return ("var", b - 16)
    if 128 <= b <= 255:
        return ("const", b - 192)
    raise CircuitError(f"malformed label byte {b}")


def _arity(label) -> int:
    return ARITY.get(label[0], 0)


@dataclass(frozen=True)
class EtrNode:
    label: tuple
    parent: int | None
    children: tuple


@dataclass
class EtrTree:
    nodes: dict                     # address -> EtrNode
    queries: int = field(default=0, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if 0 not in self.nodes:
            raise CircuitError("no root at address 0")
        if self.nodes[0].parent is not None:
            raise CircuitError("root has a parent")
        for a, node in self.nodes.items():
            if len(node.children) != _arity(node.label):
                raise CircuitError(
                    f"node {a} ({node.label[0]}) has {len(node.children)} children, "
                    f"needs {_arity(node.label)}")
            for c in node.children:
                if c not in self.nodes:
                    raise CircuitError(f"node {a} points to missing child {c}")
                if self.nodes[c].parent != a:
                    raise CircuitError(f"child {c} of node {a} names parent {self.nodes[c].parent}")
            if node.parent is not None:
                p = self.nodes.get(node.parent)
                if p is None:
                    raise CircuitError(f"node {a} points to missing parent {node.parent}")
                if a not in p.children:
                    raise CircuitError(f"node {a} names parent {node.parent}, which disowns it")
        seen, stack = set(), [0]
        while stack:
            a = stack.pop()
            if a in seen:
                raise CircuitError(f"node {a} reached twice")
            seen.add(a)
            stack.extend(self.nodes[a].children)
        if seen != set(self.nodes):
            raise CircuitError(f"unreachable nodes {sorted(set(self.nodes) - seen)}")

    @classmethod
    def from_expr(cls, expr) -> "EtrTree":
        """Breadth-first addresses; constants outside the label range are
        rewritten as ``q*63 + r``."""
        expr = expand_constants(expr)
        nodes, queue, nxt = {}, [(expr, None)], 0
        while queue:
            e, parent = queue.pop(0)
            addr = nxt
            nxt += 1
            kids = e[1:] if e[0] in ARITY else ()
            first = nxt + len(queue)
            children = tuple(range(first, first + len(kids)))
            nodes[addr] = EtrNode(e[:2] if e[0] in ("var", "const") else (e[0],), parent, children)
            queue.extend((k, addr) for k in kids)
        return cls(nodes)

    def to_expr(self, addr: int = 0):
        node = self.nodes[addr]
        if node.label[0] in ("var", "const"):
            return node.label
        return (node.label[0],) + tuple(self.to_expr(c) for c in node.children)

    def variables(self) -> int:
        """Number of unknowns: one more than the largest variable index."""
        idx = [n.label[1] for n in self.nodes.values() if n.label[0] == "var"]
        return max(idx) + 1 if idx else 0

    def width(self) -> int:
        """Smallest address width that fits every node and keeps all-ones free."""
        w = 1
        while (1 << w) - 1 < len(self.nodes) or max(self.nodes) >= (1 << w) - 1:
            w += 1
        return w

    def __len__(self):
        return len(self.nodes)


def expand_constants(expr):
    if expr[0] == "const":
        c = expr[1]
        if CONST_MIN <= c <= CONST_MAX:
            return expr
        q, r = divmod(c, 63)
        return ("+", ("*", expand_constants(("const", q)), ("const", 63)), ("const", r))
    if expr[0] == "var":
        return expr
    return (expr[0],) + tuple(expand_constants(k) for k in expr[1:])


def parse_etr(text: str):
    """S-expression such as ``(and (= (* x0 x0) 1) (< 0 x0))``."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    toks = re.findall(r"\(|\)|[^\s()]+", body)
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(toks):
            raise CircuitError("unexpected end of ETR expression")
        t = toks[pos]
        pos += 1
        if t == "(":
            if pos >= len(toks) or toks[pos] not in ARITY:
                raise CircuitError(f"expected an operator after '(' at token {pos}")
            op = toks[pos]
            pos += 1
            kids = []
            while pos < len(toks) and toks[pos] != ")":
                kids.append(read())
            if pos >= len(toks):
                raise CircuitError("missing ')'")
            pos += 1
            if len(kids) != ARITY[op]:
                raise CircuitError(f"{op} takes {ARITY[op]} operand(s), got {len(kids)}")
            return (op, *kids)
        if t == ")":
            raise CircuitError(f"unexpected ')' at token {pos - 1}")
        m = re.fullmatch(r"x(\d+)", t)
        if m:
            return ("var", int(m.group(1)))
        try:
            return ("const", int(t))
        except ValueError:
            raise CircuitError(f"bad token {t!r}") from None

    e = read()
    if pos != len(toks):
        raise CircuitError(f"trailing input after token {pos}")
    return e


def show_etr(expr) -> str:
    if expr[0] == "var":
        return f"x{expr[1]}"
    if expr[0] == "const":
        return str(expr[1])
    return "(" + " ".join([expr[0]] + [show_etr(k) for k in expr[1:]]) + ")"


# ---------------------------------------------------------------------------
# records, decoding and encoding


def record_width(w: int) -> int:
    return 8 + 3 * w


def pack_record(node: EtrNode | None, w: int) -> str:
    null = "1" * w
    if node is None:
        return "0" * 8 + null * 3
    ptr = lambda a: null if a is None else format(a, f"0{w}b")
    kids = list(node.children) + [None] * (2 - len(node.children))
    return format(label_byte(node.label), "08b") + ptr(node.parent) + ptr(kids[0]) + ptr(kids[1])


def unpack_record(bits: str, w: int):
    if len(bits) != record_width(w):
        raise CircuitError(f"record has {len(bits)} bits, layout needs {record_width(w)}")
    null = (1 << w) - 1
    label = label_from_byte(int(bits[:8], 2))
    fields = [int(bits[8 + k * w: 8 + (k + 1) * w], 2) for k in range(3)]
    parent, c0, c1 = (None if f == null else f for f in fields)
    return label, parent, c0, c1


def decode_etr(c: BooleanCircuit, w: int, executor=None) -> EtrTree:
    """Query every one of the 2^w addresses and rebuild the tree.

    ``executor`` (anything with ``map``) lets queries run concurrently.
    """
    if c.inputs != w:
        raise CircuitError(f"circuit has {c.inputs} inputs but width is {w}")
    if len(c.outputs) != record_width(w):
        raise CircuitError(f"circuit has {len(c.outputs)} outputs, layout needs {record_width(w)}")
    addrs = [format(a, f"0{w}b") for a in range(1 << w)]
    mapper = executor.map if executor is not None else map
    records = list(mapper(lambda a: eval_circuit(c, a), addrs))
    nodes = {}
    for a, bits in enumerate(records):
        label, parent, c0, c1 = unpack_record(bits, w)
        if label is None:
            continue
        k = _arity(label)
        kids = (c0, c1)[:k]
        if any(x is None for x in kids):
            raise CircuitError(f"node {a} ({label[0]}) has a null child pointer")
        if any(x is not None for x in (c0, c1)[k:]):
            raise CircuitError(f"node {a} ({label[0]}) has a surplus child pointer")
        nodes[a] = EtrNode(label, parent, kids)
    if not nodes:
        raise CircuitError("circuit describes no nodes")
    tree = EtrTree(nodes)
    tree.queries = len(records)
    return tree


class _Builder:
    """Hash-consed AND/OR/NOT construction over ``w`` inputs."""

    def __init__(self, w):
        self.w = w
        self.gates = {}
        self.memo = {}
        self.next = w
        self.false = self.gate("AND", 0, self.gate("NOT", 0))
        self.true = self.gate("NOT", self.false)

    def gate(self, op, *args):
        if op != "NOT":
            args = tuple(sorted(args))
        key = (op, args)
        if key not in self.memo:
            self.memo[key] = self.next
            self.gates[self.next] = (op, args)
            self.next += 1
        return self.memo[key]

    def mux(self, s, hi, lo):
        if hi == lo:
            return hi
        if hi == self.true and lo == self.false:
            return s
        if hi == self.false and lo == self.true:
            return self.gate("NOT", s)
        return self.gate("OR", self.gate("AND", s, hi), self.gate("AND", self.gate("NOT", s), lo))

    def function(self, table, depth=0):
        """Gate computing ``table`` (indexed by the remaining address bits)."""
        key = ("fn", depth, table)
        if key in self.memo:
            return self.memo[key]
        if all(table):
            g = self.true
        elif not any(table):
            g = self.false
        else:
            half = len(table) // 2
            g = self.mux(depth, self.function(table[half:], depth + 1),
                         self.function(table[:half], depth + 1))
        self.memo[key] = g
        return g


def encode_etr(tree: EtrTree, w: int | None = None) -> BooleanCircuit:
    """Circuit answering every address query with the tree's record."""
    w = tree.width() if w is None else w
    if w < tree.width():
        raise CircuitError(f"width {w} too small for {len(tree)} nodes")
    records = [pack_record(tree.nodes.get(a), w) for a in range(1 << w)]
    b = _Builder(w)
    outs = tuple(b.function(tuple(r[k] == "1" for r in records)) for k in range(record_width(w)))
    return BooleanCircuit(w, b.gates, outs)


# ---------------------------------------------------------------------------
# feasibility


def to_constraints(tree: EtrTree) -> ConstraintSystem:
    n = tree.variables()

    def term(a):
        node = tree.nodes[a]
        op = node.label[0]
        if op == "var":
            return Poly.var(n, node.label[1])
        if op == "const":
            return Poly.const(n, Fraction(node.label[1]))
        if op == "neg":
            return Poly.const(n, 0) - term(node.children[0])
        if op in ("+", "*"):
            l, r = (term(c) for c in node.children)
            return l + r if op == "+" else l * r
        raise CircuitError(f"node {a}: {op} used where a real term is expected")

    def formula(a):
        node = tree.nodes[a]
        op = node.label[0]
        if op in ("=", "<=", "<"):
            l, r = (term(c) for c in node.children)
            return atom(l - r if op == "=" else r - l, {"=": "==", "<=": ">=", "<": ">"}[op])
        if op == "not":
            return b_not(formula(node.children[0]))
        if op in ("and", "or"):
            parts = [formula(c) for c in node.children]
            return b_and(*parts) if op == "and" else b_or(*parts)
        raise CircuitError(f"node {a}: {op} used where a formula is expected")

    return ConstraintSystem(n, formula(0), mode="free", names=tuple(f"x{i}" for i in range(n)))


def etr_feasible_small(tree: EtrTree, D: int = 8, bound: int = 4,
                       max_evals: int = 2_000_000) -> SolveResult:
    """Witness search over rationals k/d, d <= D, |x| <= bound."""
    return solve_constraints_small(to_constraints(tree), D=D, bound=bound, max_evals=max_evals)


# ---------------------------------------------------------------------------
# shipped trees

SHIPPED = {
    "square_one": "(= (* x0 x0) 1)",
    "square_minus_one": "(= (* x0 x0) (neg 1))",
    "sum_product": "(and (= (+ x0 x1) 1) (= (* 4 (* x0 x1)) 1))",
    "x_plus_x": "(= (+ x0 x0) 2)",
    "strict_between": "(and (< 0 x0) (< x0 1))",
    "unit_circle_point": "(and (= (+ (* x0 x0) (* x1 x1)) 1) (and (< 0 x0) (< 0 x1)))",
    "disjoint_intervals": "(or (and (<= 2 x0) (<= x0 3)) (not (<= (neg 5) x0)))",
    "large_constant": "(= (* 10 x0) 1000)",
    "two_squares_negative": "(= (+ (* x0 x0) (* x1 x1)) (neg 1))",
}


def shipped_trees() -> dict:
    return {name: EtrTree.from_expr(parse_etr(src)) for name, src in SHIPPED.items()}


def eval_etr(expr, point):
    """Direct evaluation of an expression at a point (no constraint translation)."""
    op = expr[0]
    if op == "var":
        return Fraction(point[expr[1]])
    if op == "const":
        return Fraction(expr[1])
    args = [eval_etr(k, point) for k in expr[1:]]
    if op == "+":
        return args[0] + args[1]
    if op == "*":
        return args[0] * args[1]
    if op == "neg":
        return -args[0]
    if op == "=":
        return args[0] == args[1]
    if op == "<=":
        return args[0] <= args[1]
    if op == "<":
        return args[0] < args[1]
    if op == "and":
        return args[0] and args[1]
    if op == "or":
        return args[0] or args[1]
    return not args[0]


def random_etr(rng, n_vars: int = 2, depth: int = 2):
    """Random Boolean combination of comparisons between small polynomials."""

    def term(d):
        if d == 0 or rng.random() < 0.3:
            if n_vars and rng.random() < 0.6:
                return ("var", rng.randrange(n_vars))
            return ("const", rng.randint(-3, 3))
        op = rng.choice(["+", "*", "neg"])
        if op == "neg":
            return ("neg", term(d - 1))
        return (op, term(d - 1), term(d - 1))

    def formula(d):
        if d == 0 or rng.random() < 0.5:
            return (rng.choice(["=", "<=", "<"]), term(depth), term(depth))
        op = rng.choice(["and", "or", "not"])
        if op == "not":
            return ("not", formula(d - 1))
        return (op, formula(d - 1), formula(d - 1))

    return formula(depth)


def truth_table(c: BooleanCircuit) -> dict:
    return {bits: eval_circuit(c, bits)
            for bits in ("".join(p) for p in itertools.product("01", repeat=c.inputs))}
