"""Line-oriented proof scripts.

    system: AX_2_closed
    hyp 1: P(X=c1) >= 0
    goal: ...
    expect: verified
    a1: c1@X ~ c1@X BY axiom EqReflex
    a2: ... BY axiom PolyBase:Lin [1 0 1/2]
    a3: ... BY rule MP FROM a1, a2
    a4: ... BY rule Conv FROM gen:conv_zero
    a5: ... BY hyp 1
    a6: ... BY rule Deduction FROM a3 DISCHARGE 1

``#`` starts a comment line. Lin coefficients are listed per conclusion part,
rows separated by ``;``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from ..parser import ParseError, parse_formula
from ..syntax import show
from .checker import Axiom, Deduction, Hyp, Node, Proof, ProofError, Rule, System

HEADERS = ("system", "n", "extra", "goal", "expect", "name")
_LABEL = re.compile(r"^([A-Za-z0-9_.\-]+)\s*:\s*(.*)$")
_HYP = re.compile(r"^hyp\s+(\d+)\s*:\s*(.*)$")


class ScriptError(ValueError):
    def __init__(self, line_no: int, msg: str):
        super().__init__(f"line {line_no}: {msg}")
        self.line_no = line_no


def _formula(text, no):
    try:
        return parse_formula(text)
    except ParseError as exc:
        raise ScriptError(no, f"bad formula: {exc}") from None


def _args(text, no):
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ScriptError(no, f"axiom arguments must be bracketed, got {text!r}")
    rows = []
    for row in text[1:-1].split(";"):
        try:
            rows.append(tuple(Fraction(x) for x in row.replace(",", " ").split()))
        except ValueError:
            raise ScriptError(no, f"bad coefficient in {row!r}") from None
    return tuple(rows) if len(rows) > 1 else rows[0]


def _justification(text, no):
    words = text.split(None, 2)
    if not words:
        raise ScriptError(no, "empty justification")
    kind = words[0]
    if kind == "hyp":
        if len(words) != 2 or not words[1].isdigit():
            raise ScriptError(no, "expected 'hyp <k>'")
        return Hyp(int(words[1]))
    if kind == "axiom":
        if len(words) < 2:
            raise ScriptError(no, "missing axiom name")
        args = _args(words[2], no) if len(words) == 3 else None
        return Axiom(words[1], args)
    if kind == "rule":
        m = re.match(r"^(\w+)(?:\s+FROM\s+(.*))?$", text[len("rule"):].strip())
        if not m:
            raise ScriptError(no, f"bad rule justification {text!r}")
        name, rest = m.group(1), (m.group(2) or "").strip()
        if name == "Deduction":
            d = re.match(r"^(\S+)\s+DISCHARGE\s+(\d+)$", rest)
            if not d:
                raise ScriptError(no, "expected 'rule Deduction FROM <label> DISCHARGE <k>'")
            return Deduction(d.group(1), int(d.group(2)))
        if rest.startswith("gen:"):
            return Rule(name, (), rest[4:].strip())
        prem = tuple(p.strip() for p in rest.split(",") if p.strip())
        return Rule(name, prem)
    raise ScriptError(no, f"unknown justification kind {kind!r}")


def parse_script(text: str) -> Proof:
    head = {}
    hyps = {}
    nodes = []
    notes = {}
    pending = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            pending = line[1:].strip()
            continue
        m = _HYP.match(line)
        if m:
            hyps[int(m.group(1))] = _formula(m.group(2), no)
            continue
        m = _LABEL.match(line)
        if not m:
            raise ScriptError(no, f"cannot read {line!r}")
        key, rest = m.groups()
        if key in HEADERS:
            if key in head:
                raise ScriptError(no, f"duplicate header {key}")
            head[key] = (rest.strip(), no)
            continue
        if " BY " not in rest:
            raise ScriptError(no, "missing ' BY '")
        ftext, jtext = rest.rsplit(" BY ", 1)
        nodes.append(Node(key, _formula(ftext, no), _justification(jtext.strip(), no)))
        if pending:
            notes[key] = pending
        pending = None
    if sorted(hyps) != list(range(1, len(hyps) + 1)):
        raise ScriptError(0, "hypotheses must be numbered 1..k")
    try:
        n = int(head["n"][0]) if "n" in head else None
        extras = tuple(e.strip() for e in head.get("extra", ("", 0))[0].split(",") if e.strip())
        system = System.parse(head.get("system", ("AX", 0))[0], n, extras)
    except (ValueError, ProofError) as exc:
        raise ScriptError(head.get("system", ("", 0))[1], str(exc)) from None
    goal = _formula(head["goal"][0], head["goal"][1]) if "goal" in head else None
    return Proof(nodes, tuple(hyps[k] for k in sorted(hyps)), goal, system,
                 head.get("expect", (None, 0))[0], head.get("name", ("", 0))[0], notes)


def load_script(path) -> Proof:
    p = Path(path)
    proof = parse_script(p.read_text())
    if not proof.name:
        proof.name = p.stem
    return proof


def _fmt_args(args) -> str:
    rows = args if args and isinstance(args[0], tuple) else (args,)
    return "[" + "; ".join(" ".join(str(x) for x in r) for r in rows) + "]"


def _fmt_just(j) -> str:
    if isinstance(j, Hyp):
        return f"hyp {j.index}"
    if isinstance(j, Axiom):
        return f"axiom {j.schema}" + (f" {_fmt_args(j.args)}" if j.args else "")
    if isinstance(j, Deduction):
        return f"rule Deduction FROM {j.source} DISCHARGE {j.discharge}"
    if j.generator is not None:
        return f"rule {j.name} FROM gen:{j.generator}"
    return f"rule {j.name} FROM {', '.join(j.premises)}"


def format_script(proof: Proof) -> str:
    """Inverse of :func:`parse_script`. Node notes become comment lines."""
    comments = proof.notes
    s = proof.system
    out = []
    if proof.name:
        out.append(f"name: {proof.name}")
    out.append(f"system: {s.name}")
    if s.n is not None and s.base != "AX_N":
        out.append(f"n: {s.n}")
    if s.extras:
        out.append(f"extra: {', '.join(s.extras)}")
    for k, h in enumerate(proof.hypotheses, 1):
        out.append(f"hyp {k}: {show(h)}")
    if proof.goal is not None:
        out.append(f"goal: {show(proof.goal)}")
    if proof.expect:
        out.append(f"expect: {proof.expect}")
    for node in proof.nodes:
        if comments and node.label in comments:
            out.append(f"# {comments[node.label]}")
        out.append(f"{node.label}: {show(node.formula)} BY {_fmt_just(node.just)}")
    return "\n".join(out) + "\n"
