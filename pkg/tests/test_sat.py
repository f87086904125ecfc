import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from causalsum.acceptance import conv_family, sumupper_family
from causalsum.constraints import BAtom, Poly
from causalsum.formats import format_model, parse_model
from causalsum.gen import m_n_model, tiny_sequent
from causalsum.models import FRONTDOOR_CONCLUSION
from causalsum.parser import parse_formula, parse_sequent
from causalsum.sat import (
    BruteConfig, SatConfig, SatError, StateDescription, Support, brute_force_sat,
    check_support_compatibility, description_count, enumerate_state_descriptions, holds,
    realizable_descriptions, reduce_to_constraints, restricted_growth_strings, sat_bounded,
)
from causalsum.scm import event_probability, validate
from causalsum.semantics import satisfies_sequent
from causalsum.syntax import Box, Const, EAtom, ETop, Sequent, e_conj

IDENT = {"X": {1: 1, 2: 2}, "Y": {1: 1, 2: 2}, "Z": {1: 1, 2: 2}}


def _count_by_enumeration(variables, ranges):
    """|Δ| by listing every (intervention, world) table explicitly."""
    keys = []
    for r in range(len(variables) + 1):
        for sub in itertools.combinations(variables, r):
            for vals in itertools.product(*(ranges[v] for v in sub)):
                keys.append(dict(zip(sub, vals)))
    per_key = []
    for k in keys:
        worlds = [w for w in itertools.product(*(ranges[v] for v in variables))
                  if all(w[variables.index(v)] == x for v, x in k.items())]
        per_key.append(len(worlds))
    total = 1
    for c in per_key:
        total *= c
    return total


def test_one_binary_variable():
    d = enumerate_state_descriptions(parse_formula("P(X=c1) > 0"), {"X": (1, 2)})
    # observational world (2 choices) times one forced world per intervention
    assert d.interventions == ((), (("X", 1),), (("X", 2),))
    assert d.size == len(d.descriptions) == 2 == _count_by_enumeration(["X"], {"X": (1, 2)})


def test_no_variables():
    d = enumerate_state_descriptions(parse_formula("P(true) > 0"), {})
    assert d.size == 1 and d.descriptions[0].worlds == ((),)


def test_frontdoor_description_count():
    f = parse_formula(FRONTDOOR_CONCLUSION)
    ranges = {v: (1, 2) for v in "XYZ"}
    d = enumerate_state_descriptions(f, ranges, cap=10)
    want = _count_by_enumeration(["X", "Y", "Z"], ranges)
    assert d.size == want == description_count(("X", "Y", "Z"), ranges, d.interventions)
    assert d.descriptions is None  # over the cap, so only counted


def _desc(worlds_by_key):
    keys = tuple(worlds_by_key)
    return StateDescription(("X", "Y"), keys, tuple(worlds_by_key[k] for k in keys))


def test_support_compatibility():
    d = _desc({(): (1, 1), (("X", 1),): (1, 1), (("X", 2),): (2, 2)})
    assert check_support_compatibility(Support((d,), ("X", "Y")))
    assert not check_support_compatibility(Support((d,), ("Y", "X")))
    assert check_support_compatibility(Support((), ("Y", "X")))


def test_realizable_descriptions_pass_compatibility():
    ranges = {"X": (1, 2), "Y": (1, 2)}
    keys = [(), (("X", 1),), (("X", 2),), (("Y", 1),)]
    for order in (("X", "Y"), ("Y", "X")):
        descs = realizable_descriptions(("X", "Y"), ranges, keys, order)
        assert descs
        assert check_support_compatibility(Support(tuple(descs), order))


def test_reduce_p_top_and_membership():
    d1 = _desc({(): (1, 1)})
    d2 = _desc({(): (2, 1)})
    sup = Support((d1, d2), ("X", "Y"))
    cs = reduce_to_constraints(parse_formula("P(true) >= P(true)"), sup, IDENT)
    # P(true) covers every description, which is 1 on the simplex
    assert cs.formula.value is True
    cs = reduce_to_constraints(parse_formula("P(X=c1) >= 0"), sup, IDENT)
    assert isinstance(cs.formula, BAtom)
    assert cs.formula.poly.terms == Poly.var(2, 0).terms


def test_reduce_counterfactual_conjunction():
    keys = [(), (("X", 1),), (("X", 2),)]
    descs = realizable_descriptions(("X", "Y"), {"X": (1, 2), "Y": (1, 2)}, keys, ("X", "Y"))
    f = parse_formula("P([X=c1] Y=c1 & [X=c2] Y=c1) >= 0")
    cs = reduce_to_constraints(f, Support(tuple(descs), ("X", "Y")), IDENT)
    members = {m.index(1) for m in cs.formula.poly.terms}
    want = {i for i, d in enumerate(descs)
            if d.world((("X", 1),))[1] == 1 and d.world((("X", 2),))[1] == 1}
    assert members == want


def test_sat_positive_pair():
    r = sat_bounded(parse_sequent("|- P(X=c1) > 0 & P(X=c2) > 0"), SatConfig(n=2, denom=8))
    assert r.verdict == "SAT"
    assert [w for _, w in r.witness.exo] == [Fraction(1, 2)] * 2


@pytest.mark.parametrize("n", [1, 4, 10])
def test_conv_family_is_finitely_satisfiable(n):
    r = sat_bounded(Sequent((), conv_family(n)), SatConfig(n=2, denom=16))
    assert r.verdict == "SAT"


def test_impossible_inequality_is_pruned():
    for n in (1, 2):
        for D in (1, 8):
            r = sat_bounded(parse_sequent("|- P(true) < P(false)"), SatConfig(n=n, denom=D))
            assert r.verdict == "UNSAT"
            assert r.stats["pruned"] == r.stats["branches"]


def test_sumupper_family_past_normalization():
    r = sat_bounded(Sequent((), sumupper_family(2)), SatConfig(n=2, denom=16))
    assert r.verdict == "UNSAT" and r.stats["pruned"] == r.stats["branches"]
    r = sat_bounded(Sequent((), sumupper_family(2)), SatConfig(n=3, denom=16))
    assert r.verdict == "SAT"


def test_caps():
    with pytest.raises(SatError):
        SatConfig(n=4)
    with pytest.raises(SatError):
        sat_bounded(parse_sequent("|- P(X=c3) > 0"), SatConfig(n=2))


def test_brute_force_examples():
    assert brute_force_sat(parse_sequent("|- P(X=c1) >= P(X=c1)")).verdict == "SAT"
    assert brute_force_sat(parse_sequent("|- P(X=c1) > 1")).verdict == "UNSAT"


def test_restricted_growth_strings_are_bell_numbers():
    assert [sum(1 for _ in restricted_growth_strings(n)) for n in range(5)] == [1, 1, 2, 5, 15]


# --- properties -------------------------------------------------------------


@settings(max_examples=20)
@given(st.integers(0, 10**9), st.booleans())
def test_witness_reflects_satisfiability(seed, causal):
    seq = tiny_sequent(random.Random(seed), causal)
    r = sat_bounded(seq, SatConfig(n=2, denom=6))
    assert r.verdict != "UNKNOWN"
    if r.verdict == "SAT":
        assert validate(r.witness).ok
        assert satisfies_sequent(r.witness, seq)
        again = parse_model(format_model(r.witness))
        assert satisfies_sequent(again, seq)


@settings(max_examples=10)
@given(st.integers(0, 10**9))
def test_agrees_with_brute_force(seed):
    seq = tiny_sequent(random.Random(seed), causal=False)
    fast = sat_bounded(seq, SatConfig(n=2, denom=8))
    slow = brute_force_sat(seq, BruteConfig(n=2, denom=8))
    if fast.verdict == "SAT":
        assert slow.verdict == "SAT"
    elif fast.verdict == "UNSAT":
        assert slow.verdict == "UNSAT"


@given(st.integers(0, 10**9))
def test_descriptions_partition_probability(seed):
    m = m_n_model(random.Random(seed), ("X", "Y"), 2, permute_constants=False)
    f = parse_formula("P([X=c1] Y=c1) >= P(Y=c2)")
    d = enumerate_state_descriptions(f, m.ranges)
    total = 0
    for delta in d.descriptions:
        parts = []
        for key, world in zip(delta.interventions, delta.worlds):
            body = e_conj(EAtom(v, Const(v, x)) for v, x in zip(delta.variables, world))
            interv = e_conj(EAtom(v, Const(v, x)) for v, x in key) if key else ETop()
            parts.append(Box(interv, body))
        total += event_probability(m, e_conj(parts))
    assert total == 1


@given(st.integers(0, 10**9))
def test_holds_matches_semantics(seed):
    r = random.Random(seed)
    keys = [(), (("X", 1),), (("X", 2),)]
    order = r.choice([("X", "Y"), ("Y", "X")])
    descs = realizable_descriptions(("X", "Y"), {"X": (1, 2), "Y": (1, 2)}, keys, order)
    d = r.choice(descs)
    ev = parse_formula("P([X=c1] Y=c2 & !Y=c1) >= 0").left.event
    got = holds(ev, d, IDENT)
    y_under_x1 = d.world((("X", 1),))[1]
    y_obs = d.world(())[1]
    assert got == (y_under_x1 == 2 and y_obs == 2)
