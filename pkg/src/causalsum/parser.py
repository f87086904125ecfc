"""Recursive-descent parser for the ASCII surface syntax.

See docs/grammar.md for the EBNF. Summary::

    formula  P(X=c1 | Z=x1) >= 1/2 & !(x1 ~ c2@X) -> sum y1 . P([X=x1] Y=y1) == 1
    sequent  premise; premise |- conclusion

Comparisons ``>= > <= < ==`` and connectives ``or -> <->`` are expanded to the
core grammar while parsing. Division is cleared per comparison.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import macros
from .syntax import (
    Add, Box, Const, ConstSym, Div, EAnd, EAtom, ENot, ETop, Eq, FormulaError,
    Mul, Neg, Not, Num, Prob, RVar, RangeSym, Sequent, Signature, Sum, And,
    approx, e_or, gt, iff, implies, is_int_formula, has_box, or_,
)


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int = -1, text: str = ""):
        self.pos = pos
        self.text = text
        where = f" at offset {pos}" if pos >= 0 else ""
        super().__init__(f"{message}{where}")


_UNICODE = {
    "≿": ">=", "≽": ">=", "≻": ">", "≾": "<=", "≼": "<=", "≺": "<", "≈": "==",
    "≡": "~", "≢": "!~", "¬": "!", "∧": "&", "∨": " or ", "→": "->",
    "↔": "<->", "Σ": "sum ", "⊤": "true", "⊥": "false", "⊢": "|-", "·": "*",
}

_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|\|-|>=|<=|==|!=|!~|[-+*/()\[\]|,.;~!&<>=@])"
    r"|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*))")
_KEYWORDS = {"P", "sum", "true", "false", "or"}
_CONST = re.compile(r"c(\d+)$")


@dataclass
class Token:
    kind: str  # op | num | id | eof
    text: str
    pos: int


def tokenize(text: str) -> list:
    for k, v in _UNICODE.items():
        text = text.replace(k, v)
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            while text[pos].isspace():
                pos += 1
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, text: str, sig: Signature | None = None):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        if sig is None:
            sig = _infer(self.toks)
        self.sig = sig
        self._vars = set(sig.variables)

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def accept(self, *texts) -> bool:
        if self.peek(*texts):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.peek(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def fail(self, message: str):
        raise ParseError(message, self.tok.pos, self.text)

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}")

    # -- symbols -----------------------------------------------------------
    def variable(self) -> str:
        t = self.tok
        if t.kind != "id" or t.text in _KEYWORDS or not t.text[:1].isupper():
            self.fail("expected a random variable")
        if t.text not in self._vars:
            self.fail(f"unknown variable {t.text!r}")
        self.i += 1
        return t.text

    def _const(self, var: str, index: int) -> Const:
        n = self.sig.n_constants
        if n is not None and index > n:
            self.fail(f"unknown constant c{index} (signature has {n} per variable)")
        return Const(var, index)

    def resolve_range_var(self, name: str) -> RVar:
        hits = []
        for v in self.sig.variables:
            base = v.lower()
            if name.startswith(base + "_") and name[len(base) + 1:].isdigit():
                hits.append(RVar(v, int(name[len(base) + 1:])))
            elif (not base[-1].isdigit() and base != "c" and name.startswith(base)
                  and name[len(base):].isdigit()):
                hits.append(RVar(v, int(name[len(base):])))
        hits = [h for h in hits if h.index >= 1]
        if not hits:
            self.fail(f"unknown symbol {name!r}")
        if len(hits) > 1:
            self.fail(f"ambiguous range variable {name!r}")
        return hits[0]

    def value_symbol(self, var: str):
        """Right-hand side of an event atom ``V=...``."""
        t = self.tok
        if t.kind != "id":
            self.fail("expected a constant or range variable")
        self.i += 1
        m = _CONST.match(t.text)
        if m:
            if self.accept("@"):
                owner = self.variable()
                if owner != var:
                    self.fail(f"constant of {owner} used for {var}")
            return self._const(var, int(m.group(1)))
        sym = self.resolve_range_var(t.text)
        if sym.var != var:
            self.i -= 1
            self.fail(f"range variable {t.text} belongs to {sym.var}, not {var}")
        return sym

    def standalone_symbol(self):
        t = self.tok
        if t.kind != "id" or t.text in _KEYWORDS:
            self.fail("expected a symbol")
        self.i += 1
        m = _CONST.match(t.text)
        if m and self.peek("@"):
            self.i += 1
            return self._const(self.variable(), int(m.group(1)))
        if m:
            self.i -= 1
            self.fail(f"constant {t.text} needs '@Variable' outside events")
        return self.resolve_range_var(t.text)

    # -- events ------------------------------------------------------------
    def event(self):
        e = self.event_and()
        while self.accept("or"):
            e = e_or(e, self.event_and())
        return e

    def event_and(self):
        e = self.event_unary()
        while self.accept("&"):
            e = EAnd(e, self.event_unary())
        return e

    def event_unary(self):
        if self.accept("!"):
            return ENot(self.event_unary())
        if self.accept("("):
            e = self.event()
            self.expect(")")
            return e
        if self.accept("true"):
            return ETop()
        if self.accept("false"):
            return ENot(ETop())
        if self.peek("["):
            pos = self.tok.pos
            self.i += 1
            interv = self.intervention()
            self.expect("]")
            body = self.event_unary()
            if has_box(body):
                raise ParseError("nested interventions are not allowed", pos, self.text)
            return Box(interv, body)
        var = self.variable()
        if self.accept("!="):
            return ENot(EAtom(var, self.value_symbol(var)))
        self.expect("=")
        return EAtom(var, self.value_symbol(var))

    def intervention(self):
        e = self.int_unit()
        while self.accept("&", ","):
            e = EAnd(e, self.int_unit())
        return e

    def int_unit(self):
        if self.accept("true"):
            return ETop()
        if self.accept("("):
            e = self.intervention()
            self.expect(")")
            return e
        var = self.variable()
        self.expect("=")
        return EAtom(var, self.value_symbol(var))

    # -- terms -------------------------------------------------------------
    def term(self):
        t = self.term_mul()
        while True:
            if self.accept("+"):
                t = Add(t, self.term_mul())
            elif self.accept("-"):
                t = Add(t, Neg(self.term_mul()))
            else:
                return t

    def term_mul(self):
        t = self.term_unary()
        while True:
            if self.accept("*"):
                t = Mul(t, self.term_unary())
            elif self.accept("/"):
                t = Div(t, self.term_unary())
            else:
                return t

    def term_unary(self):
        if self.accept("-"):
            inner = self.term_unary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        return self.term_primary()

    def term_primary(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(Fraction(int(t.text)))
        if self.accept("P"):
            self.expect("(")
            ev = self.event()
            cond = self.event() if self.accept("|") else ETop()
            self.expect(")")
            return Prob(ev, cond)
        if self.accept("sum"):
            tok = self.tok
            bound = self.standalone_symbol()
            if not isinstance(bound, RVar):
                raise ParseError("sum must bind a range variable", tok.pos, self.text)
            self.expect(".")
            return Sum(bound, self.term())
        if self.accept("("):
            inner = self.term()
            self.expect(")")
            return inner
        sym = self.standalone_symbol()
        return ConstSym(sym) if isinstance(sym, Const) else RangeSym(sym)

    # -- formulas ----------------------------------------------------------
    def formula(self):
        a = self.formula_impl()
        if self.accept("<->"):
            return iff(a, self.formula_impl())
        return a

    def formula_impl(self):
        a = self.formula_or()
        if self.accept("->"):
            return implies(a, self.formula_impl())
        return a

    def formula_or(self):
        a = self.formula_and()
        while self.accept("or"):
            a = or_(a, self.formula_and())
        return a

    def formula_and(self):
        a = self.formula_unary()
        while self.accept("&"):
            a = And(a, self.formula_unary())
        return a

    def formula_unary(self):
        if self.accept("!"):
            return Not(self.formula_unary())
        if self.peek("("):
            start = self.i
            try:
                return self.comparison(strict=True)
            except (ParseError, _Backtrack):
                self.i = start
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return f
        return self.comparison()

    def comparison(self, strict: bool = False):
        start_tok = self.tok
        left = self.term()
        if self.peek("~", "!~"):
            neg = self.tok.text == "!~"
            self.i += 1
            right_tok = self.tok
            right = self.term_unary()
            for side, tok in ((left, start_tok), (right, right_tok)):
                if not isinstance(side, (ConstSym, RangeSym)):
                    raise ParseError("symbol equality needs two symbols", tok.pos, self.text)
            try:
                f = Eq(left.sym, right.sym)
            except FormulaError as exc:
                raise ParseError(str(exc), start_tok.pos, self.text) from None
            return Not(f) if neg else f
        op = self.tok.text if self.tok.kind == "op" else ""
        if op not in (">=", ">", "<=", "<", "=="):
            if strict:
                raise _Backtrack()
            self.fail("expected a comparison")
        self.i += 1
        right = self.term()
        if op == ">=":
            return macros.compare(left, right)
        if op == "<=":
            return macros.compare(right, left)
        if op == ">":
            g = macros.compare(left, right)
            return And(g, Not(macros.compare(right, left)))
        if op == "<":
            g = macros.compare(right, left)
            return And(g, Not(macros.compare(left, right)))
        return And(macros.compare(left, right), macros.compare(right, left))


def _run(text, sig, fn):
    p = Parser(text, sig)
    try:
        out = fn(p)
        p.expect_eof()
    except macros.DenominatorError as exc:
        raise ParseError(str(exc), -1, text) from None
    return out


def parse_formula(text: str, sig: Signature | None = None):
    return _run(text, sig, lambda p: p.formula())


def parse_term(text: str, sig: Signature | None = None):
    """Macro-level term (may contain Num/Div nodes)."""
    return _run(text, sig, lambda p: p.term())


def parse_event(text: str, sig: Signature | None = None):
    return _run(text, sig, lambda p: p.event())


def parse_sequent(text: str, sig: Signature | None = None):
    def go(p):
        prems = []
        if not p.accept("|-"):
            prems.append(p.formula())
            while p.accept(";"):
                prems.append(p.formula())
            p.expect("|-")
        return Sequent(tuple(prems), p.formula())
    return _run(text, sig, go)


_RV_SHAPE = re.compile(r"^(?:(?P<b>[a-z][a-z0-9]*)_\d+|(?P<b2>[a-z]*[a-z])\d+)$")


def _infer(toks, n_constants=None) -> Signature:
    """Variables are the capitalised identifiers; a range variable whose
    variable is never named (``x1 ~ x2``) contributes its uppercased stem."""
    names = []
    for t in toks:
        if (t.kind == "id" and t.text[:1].isupper() and t.text not in _KEYWORDS
                and t.text not in names):
            names.append(t.text)
    lowered = {n.lower() for n in names}
    for t in toks:
        if t.kind != "id" or t.text in _KEYWORDS or _CONST.match(t.text):
            continue
        m = _RV_SHAPE.match(t.text)
        if m:
            base = m.group("b") or m.group("b2")
            if base not in lowered and base.upper() not in names:
                names.append(base.upper())
                lowered.add(base)
    return Signature(tuple(names), n_constants)


def infer_signature(texts, n_constants: int | None = None) -> Signature:
    toks = []
    for text in texts:
        toks.extend(tokenize(text))
    return _infer(toks, n_constants)


__all__ = [
    "ParseError", "Parser", "parse_formula", "parse_term", "parse_event",
    "parse_sequent", "tokenize", "infer_signature", "approx", "gt", "is_int_formula",
]
