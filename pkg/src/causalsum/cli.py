"""Command line entry point: ``causalsum <subcommand> ...``.

Exit status: 0 for a definitive answer, 2 when the answer is UNKNOWN (budget
or scale exhausted without a verdict), 1 for errors and failed checks.
Every subcommand takes ``--json PATH`` (``-`` for stdout) to write a
versioned summary; the human-readable report then goes to stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import acceptance, circuits
from .constraints import CapExceeded
from .formats import FormatError, dump_summary, load_model, read_formula, read_sequent, save_model
from .grounding import ground_stats, universal_closure, unfold_sums
from .parser import parse_event, parse_formula, parse_term
from .sat import BruteConfig, SatConfig, SatError, brute_force_sat, sat_bounded
from .scm import ScmError
from .semantics import Evaluator, SearchBudget, find_countermodel, trace_records
from .syntax import (
    FormulaError, Geq, classify_fragment, free_vars, iter_nodes, range_var_name, show, size,
)

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2
JOBS_ENV = "CAUSALSUM_JOBS"
MODEL_CLASSES = ("M", "M_fin", "M_N", "M+", "M_fin+", "M_N+", "upto", "upto+")


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    command: str
    inputs: tuple = ()
    n: int | None = None
    denom: int = 8
    n_max: int = 64
    model_class: str = "M_N"
    seed: int = 0
    output: str | None = None
    json_path: str | None = None
    verbose: int = 0
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model_class not in MODEL_CLASSES:
            raise ValueError(f"unknown model class {self.model_class}; "
                             f"choose from {', '.join(MODEL_CLASSES)}")

    @property
    def positive(self) -> bool:
        return self.model_class.endswith("+")

    @property
    def sat_class(self) -> str:
        base = self.model_class.rstrip("+")
        if base == "upto":
            return "upto"
        if base == "M_N":
            return "M_N"
        raise ValueError(f"sat decides the bounded classes M_N and upto, not {self.model_class}")


class Report:
    """Collects human lines and the JSON payload for one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lines = []
        self.data = {"command": cfg.command}

    def say(self, *parts):
        self.lines.append(" ".join(str(p) for p in parts))

    def emit(self):
        human = sys.stderr if self.cfg.json_path == "-" else sys.stdout
        if self.lines:
            print("\n".join(self.lines), file=human)
        if self.cfg.json_path:
            text = dump_summary(self.data)
            if self.cfg.json_path == "-":
                sys.stdout.write(text)
            else:
                Path(self.cfg.json_path).write_text(text)


# ---------------------------------------------------------------------------
# subcommands


def _parse_any(kind, text):
    fn = {"formula": read_formula, "sequent": read_sequent,
          "term": lambda s: parse_term(_read(s)), "event": lambda s: parse_event(_read(s))}[kind]
    return fn(text)


def _read(s):
    p = Path(s)
    try:
        return p.read_text() if p.is_file() else s
    except OSError:
        return s


def cmd_parse(cfg, rep):
    kind = cfg.extra["kind"]
    node = _parse_any(kind, cfg.inputs[0])
    rep.data.update(kind=kind, text=show(node), size=size(node))
    rep.say(show(node))
    if kind == "formula":
        frag = classify_fragment(node)
        fv = sorted(show(v) for v in free_vars(node))
        rep.data.update(free_vars=fv, fragment=frag)
        rep.say(f"free: {', '.join(fv) or '-'}; causal={frag.causal} closed={frag.closed} "
                f"coefficient-free={frag.circle} cond_guarded={frag.cond_guarded} "
                f"max constant={frag.max_constant}")
    return EXIT_OK


def cmd_print(cfg, rep):
    node = _parse_any(cfg.extra["kind"], cfg.inputs[0])
    text = show(node)
    again = _parse_any(cfg.extra["kind"], text)
    rep.data.update(text=text, round_trip=again == node)
    rep.say(text)
    if again != node:
        rep.say("warning: printed form does not parse back to the same tree")
        return EXIT_ERROR
    return EXIT_OK


def _assignment(node, pairs):
    names = {show(v): v for v in free_vars(node)}
    iota = {}
    for item in pairs or ():
        k, _, v = item.partition("=")
        if k not in names:
            raise ScmError(f"{k} is not a free variable here (free: {', '.join(sorted(names))})")
        rv = names[k]
        iota[(rv.var, rv.index)] = int(v)
    return iota


def _sides(f):
    out, seen = [], set()
    for n in iter_nodes(f):
        if isinstance(n, Geq):
            for t in (n.left, n.right):
                if show(t) not in seen:
                    seen.add(show(t))
                    out.append(t)
    return out


def cmd_eval(cfg, rep):
    scm = load_model(cfg.extra["model"])
    ev = Evaluator(scm)
    if cfg.extra.get("term"):
        t = parse_term(_read(cfg.extra["term"]))
        if cfg.extra.get("assign") or not free_vars(t):
            iotas = [_assignment(t, cfg.extra.get("assign"))]
        else:
            iotas = list(ev.assignments(free_vars(t)))
        recs = list(trace_records(scm, t, iotas))
        rep.data["values"] = [{"assignment": _names(iota), "value": ev.term(t, iota)}
                              for iota in iotas]
        for row in rep.data["values"]:
            rep.say(_fmt_iota(row["assignment"]) + str(row["value"]))
        _trace(cfg, recs)
        return EXIT_OK
    f = read_formula(cfg.extra["formula"])
    if cfg.extra.get("assign"):
        iotas = [_assignment(f, cfg.extra["assign"])]
    else:
        iotas = list(ev.assignments(free_vars(f)))
    rows, recs = [], []
    for iota in iotas:
        sides = []
        for t in _sides(f):
            rec = next(trace_records(scm, t, [iota]))
            recs.append(rec)
            sides.append((show(t), str(ev.term(t, iota))))
        holds = ev.sat(f, iota)
        rows.append({"assignment": _names(iota),
                     "sides": [{"term": a, "value": b} for a, b in sides], "holds": holds})
        prefix = _fmt_iota(rows[-1]["assignment"])
        for a, b in sides:
            rep.say(f"{prefix}{a} = {b}")
        rep.say(f"{prefix}formula {'holds' if holds else 'fails'}")
    valid = all(r["holds"] for r in rows)
    rep.data.update(formula=show(f), rows=rows, valid=valid)
    rep.say("valid in the model" if valid else "not valid in the model")
    _trace(cfg, recs)
    return EXIT_OK


def _names(iota):
    return {range_var_name(v, i): x for (v, i), x in sorted(iota.items())}


def _fmt_iota(a):
    return ("[" + ", ".join(f"{k}={v}" for k, v in a.items()) + "] ") if a else ""


def _trace(cfg, recs):
    path = cfg.extra.get("trace")
    if path:
        import json
        with open(path, "w") as fh:
            for r in recs:
                fh.write(json.dumps(r, sort_keys=True) + "\n")


def cmd_entail(cfg, rep):
    seq = read_sequent(cfg.inputs[0])
    results = {}
    for path in cfg.extra["model"]:
        scm = load_model(path)
        ev = Evaluator(scm)
        ok = ev.sequent(seq)
        failing = [i for i, g in enumerate(seq.premises, 1) if not ev.valid(g)]
        results[path] = {"satisfied": ok, "failing_premises": failing}
        why = f"premise {failing[0]} is not valid" if failing else (
            "conclusion valid" if ok else "premises valid, conclusion not")
        rep.say(f"{path}: {'satisfies' if ok else 'violates'} the sequent ({why})")
    rep.data.update(sequent=show(seq), models=results)
    return EXIT_OK


def cmd_countermodel(cfg, rep):
    seq = read_sequent(cfg.inputs[0])
    budget = SearchBudget(max_range=cfg.extra["max_range"], max_denominator=cfg.denom,
                          positive=cfg.positive, seed=cfg.seed,
                          random_models=cfg.extra["random_models"])
    cm = find_countermodel(seq, budget)
    rep.data["sequent"] = show(seq)
    if cm is None:
        rep.data["result"] = "UNKNOWN"
        rep.say("no countermodel within the search budget (UNKNOWN)")
        return EXIT_UNKNOWN
    rep.data["result"] = "countermodel"
    rep.data["assignment"] = _names(cm.assignment)
    rep.say("countermodel found" + (f" at {rep.data['assignment']}" if cm.assignment else ""))
    _witness(cfg, rep, cm.scm)
    return EXIT_OK


def _witness(cfg, rep, scm):
    if cfg.output:
        save_model(scm, cfg.output)
        rep.data["witness"] = cfg.output
        rep.say(f"witness written to {cfg.output}")
    else:
        from .formats import format_model
        rep.say(format_model(scm).rstrip())


def cmd_ground(cfg, rep):
    f = read_formula(cfg.inputs[0])
    n = cfg.n or 2
    g = universal_closure(f, n) if cfg.extra["closure"] else f
    g = unfold_sums(g, n, numerals=cfg.extra["numerals"])
    st = ground_stats(f, n, numerals=cfg.extra["numerals"])
    rep.data.update(input=show(f), ground=show(g), n=n, stats=st)
    rep.say(show(g))
    return EXIT_OK


def _sat_report(rep, r, cfg):
    stats = {k: v for k, v in r.stats.items() if k != "seconds"}
    rep.data.update(verdict=r.verdict, reason=r.reason, stats=stats)
    rep.say(r.verdict + (f": {r.reason}" if r.reason else ""))
    if r.verdict == "SAT":
        _witness(cfg, rep, r.witness)
    return EXIT_OK if r.definitive else EXIT_UNKNOWN


def cmd_sat(cfg, rep):
    seq = read_sequent(cfg.inputs[0])
    sc = SatConfig(n=cfg.n or 2, denom=cfg.denom, mode=cfg.extra["mode"], positive=cfg.positive,
                   model_class=cfg.sat_class, time_limit=cfg.extra.get("time_limit"))
    rep.data["sequent"] = show(seq)
    return _sat_report(rep, sat_bounded(seq, sc), cfg)


def cmd_brute(cfg, rep):
    seq = read_sequent(cfg.inputs[0])
    bc = BruteConfig(n=cfg.n or 2, denom=cfg.denom, positive=cfg.positive,
                     model_class=cfg.sat_class)
    rep.data["sequent"] = show(seq)
    return _sat_report(rep, brute_force_sat(seq, bc), cfg)


def _proof_path(p):
    from .proofs.corpus import CORPUS_DIR
    path = Path(p)
    if path.exists():
        return path
    for cand in (CORPUS_DIR / path.name, CORPUS_DIR / f"{path.name}.prf"):
        if cand.exists():
            return cand
    raise FileNotFoundError(f"no proof script {p} (and none named {path.name} in the corpus)")


def cmd_prove(cfg, rep):
    from .proofs import System, check_proof, load_script
    proof = load_script(_proof_path(cfg.inputs[0]))
    system = proof.system
    if cfg.extra.get("system"):
        system = System.parse(cfg.extra["system"], cfg.n, proof.system.extras)
    elif cfg.n is not None:
        system = System.parse(proof.system.name, cfg.n, proof.system.extras)
    v = check_proof(proof, system, n_max=cfg.n_max)
    rep.data.update(proof=proof.name, system=system.name, status=v.status, node=v.node,
                    rule=v.rule, reason=v.reason, bounded=[list(b) for b in v.bounded],
                    n_max=cfg.n_max)
    rep.say(f"{proof.name}: {v.show()}")
    return EXIT_OK


def cmd_fuzz(cfg, rep):
    from .proofs.fuzz import MUTATIONS, SCHEMA_CLASSES
    chosen = cfg.extra.get("schema") or None
    rows = acceptance.fuzz_reports(cfg.seed, cfg.extra["trials"],
                                   cfg.extra["mutation_trials"], cfg.jobs)
    rows = [r for r in rows if not chosen or r[1] in chosen]
    if chosen:
        unknown = set(chosen) - set(SCHEMA_CLASSES) - set(MUTATIONS)
        if unknown:
            raise KeyError(f"unknown schemas {sorted(unknown)}")
    bad = False
    table = []
    for kind, name, trials, viol, unrec in rows:
        ok = (viol == 0 and unrec == 0) if kind == "schema" else viol > 0
        bad |= not ok
        table.append({"kind": kind, "name": name, "trials": trials, "violations": viol,
                      "not_recognized": unrec, "ok": ok})
        expect = "" if kind == "schema" else " (mutation: violations expected)"
        rep.say(f"{'ok ' if ok else 'BAD'} {name:<20} {trials:>5} trials {viol:>4} violations{expect}")
    rep.data.update(rows=table, seed=cfg.seed)
    return EXIT_ERROR if bad else EXIT_OK


def _tree_arg(cfg):
    if cfg.extra.get("tree"):
        trees = circuits.shipped_trees()
        if cfg.extra["tree"] not in trees:
            raise KeyError(f"no shipped tree {cfg.extra['tree']!r}; have {', '.join(trees)}")
        return trees[cfg.extra["tree"]]
    if cfg.extra.get("etr"):
        return circuits.EtrTree.from_expr(circuits.parse_etr(_read(cfg.extra["etr"])))
    if cfg.inputs:
        c = circuits.load_netlist(cfg.inputs[0])
        return circuits.decode_etr(c, cfg.extra.get("width") or c.inputs)
    raise ValueError("give a netlist file, --etr or --tree")


def cmd_circuit(cfg, rep):
    action = cfg.extra["action"]
    if action == "eval":
        c = circuits.load_netlist(cfg.inputs[0])
        out = circuits.eval_circuit(c, cfg.extra["input"])
        rep.data.update(input=cfg.extra["input"], output=out)
        rep.say(out)
        return EXIT_OK
    if action == "decode":
        c = circuits.load_netlist(cfg.inputs[0])
        w = cfg.extra["width"]
        if cfg.jobs > 1:
            with ThreadPoolExecutor(cfg.jobs) as ex:
                t = circuits.decode_etr(c, w, ex)
        else:
            t = circuits.decode_etr(c, w)
        expr = circuits.show_etr(t.to_expr())
        rep.data.update(width=w, queries=t.queries, nodes=len(t), tree=expr)
        rep.say(expr)
        rep.say(f"{len(t)} nodes, {t.queries} queries at width {w}")
        return EXIT_OK
    if action == "encode":
        t = _tree_arg(cfg)
        c = circuits.encode_etr(t, cfg.extra.get("width"))
        text = circuits.format_netlist(c)
        if cfg.output:
            Path(cfg.output).write_text(text)
            rep.say(f"{c.size} gates over {c.inputs} inputs written to {cfg.output}")
        else:
            rep.say(text.rstrip())
        rep.data.update(gates=c.size, width=c.inputs, output=cfg.output)
        return EXIT_OK
    t = _tree_arg(cfg)
    r = circuits.etr_feasible_small(t, D=cfg.denom, bound=cfg.extra["bound"])
    rep.data.update(tree=circuits.show_etr(t.to_expr()), status=r.status, witness=r.witness,
                    denominator=r.denominator)
    if r.found:
        rep.say("witness " + ", ".join(f"x{i}={v}" for i, v in enumerate(r.witness)))
        return EXIT_OK
    if r.status == "infeasible":
        rep.say("infeasible over the reals (pruned)")
        return EXIT_OK
    rep.say(f"{r.status} (UNKNOWN: no witness with denominators <= {cfg.denom}, "
            f"|x| <= {cfg.extra['bound']})")
    return EXIT_UNKNOWN


def cmd_corpus(cfg, rep):
    if cfg.extra.get("list"):
        for name, (crit, limit, _) in acceptance.SCENARIOS.items():
            rep.say(f"{crit}. {name} (limit {limit}s)")
        rep.data["scenarios"] = list(acceptance.SCENARIOS)
        return EXIT_OK
    start = time.monotonic()
    outs = acceptance.run_all(cfg.extra.get("only"), cfg.seed, cfg.jobs)
    for o in outs:
        rep.say(o.line())
    failed = [o.name for o in outs if not o.ok]
    rep.say(f"{len(outs) - len(failed)}/{len(outs)} passed in {time.monotonic() - start:.1f}s"
            + (f"; failed: {', '.join(failed)}" if failed else ""))
    rep.data["scenarios"] = [{"name": o.name, "criterion": o.criterion, "ok": o.ok,
                              "detail": o.detail} for o in outs]
    rep.data["failed"] = failed
    return EXIT_ERROR if failed else EXIT_OK


COMMANDS = {
    "parse": cmd_parse, "print": cmd_print, "eval": cmd_eval, "entail-check": cmd_entail,
    "find-countermodel": cmd_countermodel, "ground": cmd_ground, "sat": cmd_sat,
    "brute-sat": cmd_brute, "prove": cmd_prove, "fuzz-soundness": cmd_fuzz,
    "circuit": cmd_circuit, "corpus": cmd_corpus,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", dest="json_path", metavar="PATH",
                        help="write a JSON summary ('-' for stdout)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=int, default=0)
    pooled = argparse.ArgumentParser(add_help=False)
    pooled.add_argument("--jobs", type=int, default=None,
                        help=f"worker count (default ${JOBS_ENV} or 1)")
    classed = argparse.ArgumentParser(add_help=False)
    classed.add_argument("--class", dest="model_class", default="M_N", choices=MODEL_CLASSES)
    classed.add_argument("--positive", action="store_true", help="shorthand for the + class")

    p = argparse.ArgumentParser(prog="causalsum", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("parse", "print"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("input", help="file or literal text")
        s.add_argument("--kind", choices=("formula", "sequent", "term", "event"),
                       default="formula")

    s = sub.add_parser("eval", parents=[common])
    s.add_argument("--model", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--formula")
    g.add_argument("--term")
    s.add_argument("--assign", nargs="*", metavar="x1=2")
    s.add_argument("--trace", metavar="PATH", help="JSON-lines evaluation log")

    s = sub.add_parser("entail-check", parents=[common])
    s.add_argument("input", help="sequent file or text")
    s.add_argument("--model", action="append", required=True)

    s = sub.add_parser("find-countermodel", parents=[common, seeded, classed])
    s.add_argument("input")
    s.add_argument("--max-range", type=int, default=3)
    s.add_argument("--denom", type=int, default=12)
    s.add_argument("--random-models", type=int, default=2000)
    s.add_argument("--out")

    s = sub.add_parser("ground", parents=[common])
    s.add_argument("input")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--closure", action="store_true", help="also close free variables")
    s.add_argument("--numerals", action="store_true", help="coefficients as numerals j")

    for name in ("sat", "brute-sat"):
        s = sub.add_parser(name, parents=[common, classed])
        s.add_argument("input")
        s.add_argument("--n", type=int, default=2)
        s.add_argument("--denom", type=int, default=8)
        s.add_argument("--out", help="write the witness model here")
        if name == "sat":
            s.add_argument("--mode", choices=("auto", "prob", "causal"), default="auto")
            s.add_argument("--time-limit", type=float)

    s = sub.add_parser("prove", parents=[common])
    s.add_argument("input", help="proof script, or the name of a corpus script")
    s.add_argument("--system")
    s.add_argument("--n", type=int)
    s.add_argument("--nmax", type=int, default=64)

    s = sub.add_parser("fuzz-soundness", parents=[common, seeded, pooled])
    s.add_argument("--schema", nargs="*")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--mutation-trials", type=int, default=300)

    s = sub.add_parser("circuit", parents=[common])
    csub = s.add_subparsers(dest="action", required=True)
    c = csub.add_parser("eval", parents=[common])
    c.add_argument("input")
    c.add_argument("--input-bits", dest="bits", required=True)
    c = csub.add_parser("decode", parents=[common, pooled])
    c.add_argument("input")
    c.add_argument("--width", type=int, required=True)
    for name in ("encode", "feasible"):
        c = csub.add_parser(name, parents=[common])
        c.add_argument("input", nargs="?")
        c.add_argument("--etr", help="S-expression tree (text or file)")
        c.add_argument("--tree", help="name of a shipped tree")
        c.add_argument("--width", type=int)
        if name == "encode":
            c.add_argument("--out")
        else:
            c.add_argument("--denom", type=int, default=8)
            c.add_argument("--bound", type=int, default=4)

    s = sub.add_parser("corpus", parents=[common, seeded, pooled])
    s.add_argument("--only", nargs="*")
    s.add_argument("--list", action="store_true")
    return p


def config_from_args(a) -> RunConfig:
    d = vars(a)
    extra = {k: v for k, v in d.items() if k not in (
        "command", "input", "n", "denom", "nmax", "model_class", "seed", "out", "json_path",
        "verbose", "jobs", "positive")}
    if "bits" in extra:
        extra["input"] = extra.pop("bits")
    if "kind" not in extra and a.command in ("parse", "print"):
        extra["kind"] = "formula"
    mc = d.get("model_class") or "M_N"
    if d.get("positive") and not mc.endswith("+"):
        mc += "+"
    jobs = d.get("jobs")
    return RunConfig(
        command=a.command,
        inputs=(d["input"],) if d.get("input") else (),
        n=d.get("n"),
        denom=d.get("denom") or 8,
        n_max=d.get("nmax") or 64,
        model_class=mc,
        seed=d.get("seed") or 0,
        output=d.get("out"),
        json_path=d.get("json_path"),
        verbose=d.get("verbose") or 0,
        jobs=jobs if jobs is not None else default_jobs(),
        extra=extra,
    )


ERRORS = (FormulaError, FormatError, ScmError, SatError, CapExceeded, circuits.CircuitError,
          FileNotFoundError, IsADirectoryError, KeyError, ValueError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        rep = Report(cfg)
        code = COMMANDS[cfg.command](cfg, rep)
    except ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"causalsum {args.command}: error: {msg}", file=sys.stderr)
        if getattr(args, "json_path", None):
            text = dump_summary({"command": args.command, "error": str(msg)})
            if args.json_path == "-":
                sys.stdout.write(text)
            else:
                Path(args.json_path).write_text(text)
        return EXIT_ERROR
    rep.data["exit"] = code
    rep.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
