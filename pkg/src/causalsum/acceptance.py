"""The acceptance scenarios, runnable one by one or as a table.

Each scenario returns an :class:`Outcome`; ``run`` never raises, so a broken
scenario (or a corrupted corpus file) shows up as a named failure.
"""
from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import circuits
from .constraints import solve_constraints_small
from .formats import format_model, parse_model
from .gen import GenConfig, m_n_model, random_closed_formula, tiny_sequent
from .grounding import unfold_sums
from .models import (
    LATE_DENOMINATOR, cwc_formula, cwc_models, frontdoor_model, frontdoor_sequent, late_model,
    late_sequent,
)
from .parser import parse_formula, parse_term
from .sat import BruteConfig, SatConfig, brute_force_sat, sat_bounded
from .scm import check_positivity, joint_distribution
from .semantics import Evaluator, find_countermodel
from .syntax import Sequent, show, sum_depth


@dataclass
class Outcome:
    name: str
    criterion: int
    ok: bool
    detail: str
    seconds: float = 0.0
    limit: float = 0.0
    facts: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.ok else "FAIL"
        slow = "" if self.seconds <= self.limit else f" (over the {self.limit:g}s limit)"
        return f"[{mark}] {self.criterion}. {self.name}: {self.detail} [{self.seconds:.1f}s{slow}]"


def _fail(msg, **facts):
    return False, msg, facts


# ---------------------------------------------------------------------------
# 1. front door


def frontdoor(seed=0, models=100):
    rng = random.Random(f"{seed}:frontdoor")
    seq = frontdoor_sequent()
    shapes = set()
    for k in range(models):
        m = frontdoor_model(rng)
        shapes.add(tuple(len(m.ranges[v]) for v in "XZY"))
        if not check_positivity(m):
            return _fail(f"model {k} is not positive")
        ev = Evaluator(m)
        for i, g in enumerate(seq.premises, 1):
            bad = ev.falsifying(g)
            if bad is not None:
                return _fail(f"model {k}: premise {i} fails at {bad}")
        bad = ev.falsifying(seq.conclusion)
        if bad is not None:
            return _fail(f"model {k}: conclusion fails at {bad}")
    return True, f"{models} positive models, 5 premises and the identity hold exactly", \
        {"models": models, "range_shapes": len(shapes)}


# ---------------------------------------------------------------------------
# 2. LATE


def late(seed=0, models=100, violating=100):
    rng = random.Random(f"{seed}:late")
    seq = late_sequent()
    den = parse_term(LATE_DENOMINATOR)
    used = 0
    for k in range(models):
        m = late_model(rng).scm
        ev = Evaluator(m)
        for i, g in enumerate(seq.premises, 1):
            if not ev.valid(g):
                return _fail(f"model {k}: premise {i} fails")
        d = ev.term(den)
        if d.kind == "fin" and d.value != 0:
            used += 1
            if not ev.valid(seq.conclusion):
                return _fail(f"model {k}: ratio identity fails with denominator {d}")
    if used < models // 2:
        return _fail(f"only {used} of {models} models had a nonzero denominator")
    bad_models = []
    for k in range(violating):
        m = late_model(rng, defiers=k % 2 == 0, exclusion=k % 2 == 1).scm
        bad_models.append(m)
    unguarded = Sequent((), seq.conclusion)
    cm = find_countermodel(unguarded, candidates=bad_models)
    if cm is None:
        return _fail("no premise-violating model falsifies the unguarded conclusion")
    ev = Evaluator(cm.scm)
    broken = [i for i, g in enumerate(seq.premises, 1) if not ev.valid(g)]
    if not broken:
        return _fail("countermodel satisfies every premise")
    falsified = sum(1 for m in bad_models if not Evaluator(m).valid(seq.conclusion))
    return True, (f"identity exact on {used}/{models} models with nonzero denominator; "
                  f"countermodel breaks premise {broken[0]}; "
                  f"{falsified}/{violating} violating models falsify the conclusion"), \
        {"nonzero_denominator": used, "falsified": falsified}


# ---------------------------------------------------------------------------
# 3. causation without correlation


def cwc(seed=0):
    m, m2 = cwc_models()
    j, j2 = joint_distribution(m), joint_distribution(m2)
    cells = sorted(set(j) | set(j2))
    if len(cells) != 4 or any(j.get(c, 0) != j2.get(c, 0) for c in cells):
        return _fail(f"observational joints differ: {j} vs {j2}")
    if any(j[c] != Fraction(1, 4) for c in cells):
        return _fail("cells are not uniform")
    f = cwc_formula()
    holds = [Evaluator(x).valid(f) for x in (m, m2)]
    if sum(holds) != 1:
        return _fail(f"causal equality holds in {sum(holds)} models")
    which = "first" if holds[0] else "second"
    return True, f"joints equal on 4 cells (1/4 each); equality holds only in the {which} model", {}


# ---------------------------------------------------------------------------
# 4. grounding


def grounding(seed=0, trials=500):
    rng = random.Random(f"{seed}:grounding")
    sums = 0
    for k in range(trials):
        n = rng.choice((2, 3))
        cfg = GenConfig(("X", "Y"), n, max_depth=3, max_sums=2, closed=True)
        f = random_closed_formula(rng, cfg)
        while sum_depth(f) == 0:
            f = random_closed_formula(rng, cfg)
        sums += sum_depth(f)
        m = m_n_model(rng, ("X", "Y"), n)
        ev = Evaluator(m)
        if ev.sat(f) != ev.sat(unfold_sums(f, n)):
            return _fail(f"trial {k}: unfolding changes the verdict of {show(f)}")
    return True, f"{trials}/{trials} formulas agree after unfolding", {"sum_nodes": sums}


# ---------------------------------------------------------------------------
# 5. reduction versus brute force


def reduction(seed=0, trials=50):
    rng = random.Random(f"{seed}:reduction")
    counts = {}
    for k in range(trials):
        seq = tiny_sequent(rng, causal=k % 2 == 1)
        mc = "M_N" if k % 4 < 2 else "upto"
        a = sat_bounded(seq, SatConfig(n=2, denom=8, model_class=mc))
        b = brute_force_sat(seq, BruteConfig(n=2, denom=8, model_class=mc))
        counts[a.verdict] = counts.get(a.verdict, 0) + 1
        if a.definitive and (a.verdict == "SAT") != (b.verdict == "SAT"):
            return _fail(f"sequent {k} ({show(seq)}): {a.verdict} vs brute force {b.verdict}")
        for r in (a, b):
            if r.verdict == "SAT":
                again = parse_model(format_model(r.witness))
                if not Evaluator(again).sequent(seq):
                    return _fail(f"sequent {k}: witness does not re-verify after reload")
    summary = ", ".join(f"{v} {c}" for v, c in sorted(counts.items()))
    return True, f"{trials} sequents agree ({summary}); witnesses reload and re-verify", counts


# ---------------------------------------------------------------------------
# 6. incompactness families


def conv_family(n: int):
    parts = [f"P(X=c1) <= 1/{k}" for k in range(1, n + 1)] + ["P(X=c1) > 0"]
    return parse_formula(" & ".join(parts))


def sumupper_family(n: int):
    lits = [f"!(c{i}@X ~ c{j}@X)" for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    total = " + ".join(f"P(X=c{i})" for i in range(1, n + 1))
    return parse_formula(" & ".join(lits + [f"{total} <= 1/2"]))


def incompactness(seed=0, conv_max=10):
    for n in range(1, conv_max + 1):
        r = sat_bounded(Sequent((), conv_family(n)), SatConfig(n=2, denom=16))
        if r.verdict != "SAT":
            return _fail(f"Conv family at n={n}: {r.verdict}")
    checks = 0
    for size in (2, 3):
        for n in range(1, size + 1):
            r = sat_bounded(Sequent((), sumupper_family(n)), SatConfig(n=size, denom=16))
            checks += 1
            if n < size and r.verdict != "SAT":
                return _fail(f"SumUpper family n={n}, N={size}: {r.verdict}")
            if n == size and not (r.verdict == "UNSAT" and r.stats["pruned"] == r.stats["branches"]):
                return _fail(f"SumUpper family n=N={size} not pruned: {r.verdict} {r.reason}")
    for n in (1, 2):
        r = sat_bounded(Sequent((), sumupper_family(n)), SatConfig(n=n + 1, denom=16))
        checks += 1
        if r.verdict != "SAT":
            return _fail(f"SumUpper family n={n} at signature size {n + 1}: {r.verdict}")
    return True, (f"Conv SAT for n<=10; SumUpper SAT for n<N and pruned at n=N "
                  f"for N in 2,3 ({checks} instances)"), {}


# ---------------------------------------------------------------------------
# 7. soundness fuzz


def _one_schema(args):
    from .proofs.fuzz import FuzzConfig, mutation_fuzz, soundness_fuzz
    kind, name, trials, seed = args
    cfg = FuzzConfig(trials=trials, seed=seed)
    rep = soundness_fuzz(name, cfg) if kind == "schema" else mutation_fuzz(name, cfg)
    return kind, name, rep.trials, len(rep.violations), rep.not_recognized


def fuzz_reports(seed=0, trials=1000, mutation_trials=300, jobs=1):
    from .proofs.fuzz import MUTATIONS, SCHEMA_CLASSES
    tasks = [("schema", s, trials, seed) for s in SCHEMA_CLASSES]
    tasks += [("mutation", m, mutation_trials, seed) for m in MUTATIONS]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_one_schema, tasks))
    return [_one_schema(t) for t in tasks]


def fuzz(seed=0, trials=1000, jobs=1):
    rows = fuzz_reports(seed, trials, jobs=jobs)
    bad = [r for r in rows if r[0] == "schema" and (r[3] or r[4])]
    if bad:
        k, name, _, v, nr = bad[0]
        return _fail(f"schema {name}: {v} violations, {nr} unrecognised instances")
    muts = [r for r in rows if r[0] == "mutation"]
    dead = [r[1] for r in muts if r[3] == 0]
    if len(muts) < 5 or dead:
        return _fail(f"mutations without violations: {dead}")
    n_schemas = len(rows) - len(muts)
    return True, (f"{n_schemas} schemas x {trials} instances, 0 violations; "
                  f"{len(muts)} mutations all caught"), \
        {r[1]: r[3] for r in muts}


# ---------------------------------------------------------------------------
# 8. proof corpus

REQUIRED_PROOFS = {
    "fin_to_distinct_2": "verified", "fin_to_distinct_3": "verified",
    "distinct_to_sumequals_2": "verified", "distinct_to_sumequals_3": "verified",
    "sumequals_to_fin_2": "verified", "sumequals_to_fin_3": "verified",
    "sum_of_sums_2": "verified", "mp_chain": "verified", "deduction_pair": "verified",
    "free_deduction_antipattern": "rejected",
}


def proofs(seed=0):
    from .proofs import check_proof, corpus_names, derive_corpus
    names = corpus_names()
    missing = sorted(set(REQUIRED_PROOFS) - set(names))
    if missing:
        return _fail(f"missing corpus scripts: {missing}")
    statuses = {}
    for name in names:
        try:
            p = derive_corpus(name)
        except Exception as exc:
            return _fail(f"corpus script {name} does not load: {exc}")
        v = check_proof(p)
        statuses[name] = v.status
        want = REQUIRED_PROOFS.get(name, p.expect)
        if want and v.status != want:
            return _fail(f"{name}: {v.show()} (expected {want})")
    return True, f"{len(names)} scripts match their expected status", statuses


# ---------------------------------------------------------------------------
# 9. circuits


def circuit_round_trip(seed=0, instances=25):
    trees = circuits.shipped_trees()
    for name, t in trees.items():
        w = t.width()
        c = circuits.encode_etr(t, w)
        back = circuits.decode_etr(c, w)
        if back != t:
            return _fail(f"{name}: decode(encode(t)) differs")
        if back.queries != 1 << w:
            return _fail(f"{name}: {back.queries} queries at width {w}")
        wide = circuits.decode_etr(circuits.encode_etr(t, w + 1), w + 1)
        if wide != t or wide.queries != 1 << (w + 1):
            return _fail(f"{name}: round trip fails at width {w + 1}")
    rng = random.Random(f"{seed}:circuits")
    statuses = {}
    for k in range(instances):
        expr = circuits.random_etr(rng)
        t = circuits.EtrTree.from_expr(expr)
        decoded = circuits.decode_etr(circuits.encode_etr(t), t.width())
        a = circuits.etr_feasible_small(decoded, D=6, bound=3)
        b = solve_constraints_small(circuits.to_constraints(t), D=6, bound=3)
        statuses[a.status] = statuses.get(a.status, 0) + 1
        if (a.status, a.witness) != (b.status, b.witness):
            return _fail(f"instance {k} {circuits.show_etr(expr)}: {a.status} vs {b.status}")
        if a.found and not circuits.eval_etr(expr, a.witness):
            return _fail(f"instance {k}: witness fails direct evaluation")
    summary = ", ".join(f"{s} {c}" for s, c in sorted(statuses.items()))
    return True, (f"{len(trees)} shipped trees round-trip with 2^w queries; "
                  f"{instances} instances agree ({summary})"), statuses


# ---------------------------------------------------------------------------

SCENARIOS = {
    "frontdoor": (1, 60, frontdoor),
    "late": (2, 60, late),
    "cwc": (3, 1, cwc),
    "grounding": (4, 120, grounding),
    "reduction": (5, 600, reduction),
    "incompactness": (6, 60, incompactness),
    "fuzz": (7, 300, fuzz),
    "proofs": (8, 10, proofs),
    "circuits": (9, 30, circuit_round_trip),
}


def run(name: str, seed: int = 0, **kw) -> Outcome:
    crit, limit, fn = SCENARIOS[name]
    start = time.monotonic()
    try:
        ok, detail, facts = fn(seed, **kw)
    except Exception as exc:  # a crash is a named failure, not a traceback
        ok, detail, facts = False, f"{type(exc).__name__}: {exc}", {}
    return Outcome(name, crit, ok, detail, time.monotonic() - start, limit, facts)


def run_all(only=None, seed: int = 0, jobs: int = 1) -> list:
    names = [n for n in SCENARIOS if not only or n in only]
    unknown = set(only or ()) - set(SCENARIOS)
    if unknown:
        raise KeyError(f"unknown scenarios {sorted(unknown)}; have {', '.join(SCENARIOS)}")
    return [run(n, seed, jobs=jobs) if n == "fuzz" else run(n, seed) for n in names]
