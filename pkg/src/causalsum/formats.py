"""Text formats for models, formulas and sequents, and JSON helpers.

Model files are line oriented::

    vars X Y
    ranges
      X: 1 2
      Y: 1 2
    constants
      X: c1=1 c2=2
    exo
      u0: 1/2
      u1: 1/2
    fn X
      u0 -> 1
      u1 -> 2
    fn Y <- X
      1, u0 -> 1
      1, u1 -> 1
      2, u0 -> 2
      2, u1 -> 2

Every table must list each (parent values, outcome) row exactly once. A
missing ``constants`` entry means c_i names the i-th value of the range.
"""
from __future__ import annotations

import itertools
import json
from fractions import Fraction
from pathlib import Path

from .parser import parse_formula, parse_sequent
from .scm import Scm, identity_constants, validate
from .semantics import ExtendedReal
from .syntax import Sequent, show

SCHEMA_VERSION = 1


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        where += f"{line}: " if line else (" " if path else "")
        super().__init__(f"{where}{msg}".strip())


def _strip(text):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield no, line


def parse_model(text: str, path=None) -> Scm:
    variables = None
    ranges, constants, exo, parents, tables = {}, {}, [], {}, {}
    section, current = None, None
    for no, line in _strip(text):
        head = line.split()
        indented = line[0].isspace()
        if not indented:
            key = head[0]
            if key == "vars":
                variables = tuple(head[1:])
                section = None
            elif key in ("ranges", "constants", "exo"):
                section = key
            elif key == "fn":
                if len(head) < 2:
                    raise FormatError("expected 'fn <var> [<- parents]'", no, path)
                current = head[1]
                if current in tables:
                    raise FormatError(f"second table for {current}", no, path)
                if len(head) > 2:
                    if head[2] != "<-":
                        raise FormatError("parents follow '<-'", no, path)
                    parents[current] = tuple(head[3:])
                else:
                    parents[current] = ()
                tables[current] = {}
                section = "fn"
            else:
                raise FormatError(f"unknown section {key!r}", no, path)
            continue
        body = line.strip()
        if section == "ranges":
            var, vals = _colon(body, no, path)
            try:
                ranges[var] = tuple(int(x) for x in vals.split())
            except ValueError:
                raise FormatError(f"range of {var} must be integers", no, path) from None
        elif section == "constants":
            var, items = _colon(body, no, path)
            m = {}
            for item in items.split():
                name, _, val = item.partition("=")
                if not (name.startswith("c") and name[1:].isdigit() and val.lstrip("-").isdigit()):
                    raise FormatError(f"bad constant binding {item!r}", no, path)
                m[int(name[1:])] = int(val)
            constants[var] = m
        elif section == "exo":
            u, w = _colon(body, no, path)
            try:
                exo.append((u, Fraction(w.strip())))
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"bad weight {w.strip()!r}", no, path) from None
        elif section == "fn":
            lhs, arrow, val = body.partition("->")
            if not arrow:
                raise FormatError("table row needs '->'", no, path)
            pv_text, comma, u = lhs.rpartition(",")
            if not comma:
                pv_text, u = "", lhs
            try:
                pv = tuple(int(x) for x in pv_text.split())
                out = int(val)
            except ValueError:
                raise FormatError("table values must be integers", no, path) from None
            if len(pv) != len(parents[current]):
                raise FormatError(f"{current} has {len(parents[current])} parents, "
                                  f"row gives {len(pv)} values", no, path)
            key = (pv, u.strip())
            if key in tables[current]:
                raise FormatError(f"duplicate row for {current}", no, path)
            tables[current][key] = out
        else:
            raise FormatError("indented line outside a section", no, path)
    if variables is None:
        raise FormatError("missing 'vars' line", path=path)
    for v in variables:
        if v not in ranges:
            raise FormatError(f"no range for {v}", path=path)
        if v not in tables:
            raise FormatError(f"no table for {v}", path=path)
    extra = (set(ranges) | set(tables)) - set(variables)
    if extra:
        raise FormatError(f"undeclared variables {sorted(extra)}", path=path)
    names = [u for u, _ in exo]
    if len(set(names)) != len(names):
        raise FormatError("duplicate exogenous outcome", path=path)
    for v in variables:
        want = 1
        for p in parents[v]:
            if p not in ranges:
                raise FormatError(f"{v} reads unknown parent {p}", path=path)
            want *= len(ranges[p])
        want *= len(exo)
        if len(tables[v]) != want:
            raise FormatError(f"table for {v} has {len(tables[v])} rows, expected {want}",
                              path=path)
        for (_, u) in tables[v]:
            if u not in names:
                raise FormatError(f"table for {v} uses unknown outcome {u!r}", path=path)
    consts = identity_constants(ranges)
    consts.update(constants)
    scm = Scm(variables, ranges, parents, tuple(exo), tables, consts)
    rep = validate(scm)
    if not rep.ok:
        raise FormatError(f"invalid model: {rep.first.message}", path=path)
    return scm


def _colon(body, no, path):
    k, sep, rest = body.partition(":")
    if not sep:
        raise FormatError(f"expected '<name>: ...', got {body!r}", no, path)
    return k.strip(), rest


def format_model(scm: Scm) -> str:
    """Outcomes are renamed u0, u1, ... in declaration order."""
    names = {u: f"u{k}" for k, (u, _) in enumerate(scm.exo)}
    out = ["vars " + " ".join(scm.variables), "ranges"]
    out += [f"  {v}: " + " ".join(map(str, scm.ranges[v])) for v in scm.variables]
    out.append("constants")
    for v in scm.variables:
        m = scm.constants.get(v, {})
        out.append(f"  {v}: " + " ".join(f"c{i}={m[i]}" for i in sorted(m)))
    out.append("exo")
    out += [f"  {names[u]}: {_frac(w)}" for u, w in scm.exo]
    for v in scm.variables:
        ps = scm.parents[v]
        out.append(f"fn {v}" + (" <- " + " ".join(ps) if ps else ""))
        for pv in itertools.product(*(scm.ranges[p] for p in ps)):
            for u, _ in scm.exo:
                lhs = (" ".join(map(str, pv)) + ", " if pv else "") + names[u]
                out.append(f"  {lhs} -> {scm.tables[v][(pv, u)]}")
    return "\n".join(out) + "\n"


def load_model(path) -> Scm:
    return parse_model(Path(path).read_text(), path)


def save_model(scm: Scm, path):
    Path(path).write_text(format_model(scm))


def _joined(text):
    return " ".join(line for _, line in _strip(text))


def _text(path_or_text) -> str:
    try:
        p = Path(path_or_text)
        if p.is_file():
            return p.read_text()
    except OSError:
        pass
    return str(path_or_text)


def read_formula(path_or_text):
    text = _text(path_or_text)
    return parse_formula(_joined(text))


def read_sequent(path_or_text) -> Sequent:
    text = _joined(_text(path_or_text))
    if "|-" not in text:
        return Sequent((), parse_formula(text))
    return parse_sequent(text)


def _frac(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def to_json(x):
    """JSON-ready copy: rationals as "p/q", extended reals as "inf" and so on."""
    if isinstance(x, ExtendedReal):
        return x.to_json()
    if isinstance(x, Fraction):
        return _frac(x)
    if isinstance(x, dict):
        return {str(k): to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_json(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    if _showable(x):
        return show(x)
    if hasattr(x, "__dataclass_fields__"):
        return {k: to_json(getattr(x, k)) for k in x.__dataclass_fields__}
    return str(x)


def _showable(x):
    try:
        show(x)
        return True
    except Exception:
        return False


def dump_summary(payload: dict) -> str:
    """Versioned, key-sorted JSON so equal runs give equal bytes."""
    body = {"schema": SCHEMA_VERSION}
    body.update(to_json(payload))
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def parse_rational(s: str):
    if s in ("inf", "-inf", "undef"):
        return ExtendedReal(s)
    return Fraction(s)
