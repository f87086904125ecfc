import random

import pytest
from hypothesis import given, strategies as st

from causalsum.gen import FormulaGen, GenConfig
from causalsum.parser import parse_formula
from causalsum.proofs import (
    BOUNDED, REJECTED, VERIFIED, Axiom, Hyp, Node, Proof, Rule, System, check_axiom_instance,
    check_proof, corpus_names, derive_corpus, format_script, parse_script,
)
from causalsum.proofs.builder import CORPUS, conv_explicit
from causalsum.proofs.checker import ProofError
from causalsum.proofs.fuzz import (
    MUTATIONS, FuzzConfig, ModelPool, mutation_fuzz, rule_fuzz, soundness_fuzz,
)
from causalsum.proofs.generators import conv_zero_phi, conv_zero_term
from causalsum.syntax import Const, Geq, Prob, free_vars, gt, implies, substitute_range_var, zero


# --- schemas ----------------------------------------------------------------


def test_eq_reflex():
    assert check_axiom_instance(parse_formula("c1@X ~ c1@X"), "EqReflex") is None
    assert check_axiom_instance(parse_formula("c1@X ~ c2@X"), "EqReflex") is not None


def test_eq_dist():
    f = parse_formula("!(c1@X ~ c2@X) -> P(X=c1 & X=c2) == 0")
    assert check_axiom_instance(f, "EqDist") is None
    g = parse_formula("c1@X ~ c2@X -> P(X=c1 & X=c2) == 0")
    assert check_axiom_instance(g, "EqDist") is not None


def test_pos_requires_lcond():
    assert check_axiom_instance(parse_formula("P(!X=c1 & Y=c2) > 0"), "Pos") is None
    bad = parse_formula("P(!X=c1 & X=c1) > 0")
    assert "L_cond" in check_axiom_instance(bad, "Pos")


def test_cond_schema():
    f = parse_formula("P(Y=c1 | X=c2) >= P(Y=c2) <-> P(Y=c1 & X=c2) >= P(Y=c2) * P(X=c2)")
    assert check_axiom_instance(f, "Cond") is None


def test_fin_n_needs_matching_n():
    f = parse_formula("sum x1 . P(true) == 2")
    assert check_axiom_instance(f, "Fin_N", 2) is None
    assert check_axiom_instance(f, "Fin_N", 3) is not None
    assert check_axiom_instance(f, "Fin_N") is not None


def test_unknown_schema():
    assert "unknown" in check_axiom_instance(parse_formula("c1@X ~ c1@X"), "Nope")


# --- systems ----------------------------------------------------------------


def test_system_names():
    s = System.parse("AX_2^closed")
    assert (s.base, s.n, s.closed) == ("AX_N", 2, True)
    assert s.name == "AX_2_closed"
    assert "Fin_N" in s.axioms() and "FreeElim" not in s.rules()
    with pytest.raises(ProofError):
        System.parse("AX_2", n=3)
    with pytest.raises(ProofError):
        System("AX_N")


# --- checking ---------------------------------------------------------------

A = parse_formula("P(X=c1) >= P(X=c2)")
B = parse_formula("P(Y=c1) > 0")


def test_modus_ponens():
    nodes = [Node("a", A, Hyp(1)), Node("b", implies(A, B), Hyp(2)),
             Node("c", B, Rule("MP", ("a", "b")))]
    v = check_proof(Proof(nodes, (A, implies(A, B)), B))
    assert v.status == VERIFIED


def test_mp_premise_order_is_free():
    nodes = [Node("b", implies(A, B), Hyp(2)), Node("a", A, Hyp(1)),
             Node("c", B, Rule("MP", ("b", "a")))]
    assert check_proof(Proof(nodes, (A, implies(A, B)), B)).status == VERIFIED


def test_mp_needs_matching_antecedent():
    nodes = [Node("a", A, Hyp(1)), Node("b", implies(B, A), Hyp(2)),
             Node("c", B, Rule("MP", ("a", "b")))]
    v = check_proof(Proof(nodes, (A, implies(B, A)), B))
    assert v.status == REJECTED and v.node == "c"


def test_goal_mismatch_is_rejected():
    nodes = [Node("a", A, Hyp(1))]
    assert check_proof(Proof(nodes, (A,), B)).status == REJECTED


def test_forward_reference_is_rejected():
    nodes = [Node("c", B, Rule("MP", ("a", "b"))), Node("a", A, Hyp(1)),
             Node("b", implies(A, B), Hyp(2))]
    assert check_proof(Proof(nodes, (A, implies(A, B)), None)).status == REJECTED


def test_conv_explicit_premises_are_not_enough():
    v = check_proof(conv_explicit(50), n_max=64)
    assert v.status == REJECTED


def test_conv_generator_is_bounded():
    c = implies(conv_zero_phi(), Geq(zero(), conv_zero_term()))
    p = Proof([Node("s1", c, Rule("Conv", (), "conv_zero"))], (), c, System("AX", True))
    v = check_proof(p, n_max=64)
    assert v.status == BOUNDED
    assert v.bounded == (("s1", "Conv", 64),)


def _conv(gen, n_max):
    c = implies(conv_zero_phi(), Geq(zero(), conv_zero_term()))
    p = Proof([Node("s1", c, Rule("Conv", (), gen))], (), c, System("AX", True))
    return check_proof(p, n_max=n_max).status


@given(st.integers(1, 40), st.integers(0, 40))
def test_monotone_in_n_max(n, extra):
    assert _conv("conv_zero", n) == BOUNDED
    assert _conv("conv_zero", n + extra) == BOUNDED


def test_broken_generator_flips_once_reached():
    assert [_conv("conv_broken_after_3", k) for k in (1, 3, 4, 10)] == \
        [BOUNDED, BOUNDED, REJECTED, REJECTED]


@given(st.integers(0, 10**9), st.integers(1, 3))
def test_free_elim_closure(seed, k):
    r = random.Random(seed)
    g = FormulaGen(r, GenConfig(("X", "Y"), 3, closed=False))
    ev = g.cond_event(())
    f = gt(Prob(ev), zero())
    v = next(iter(free_vars(f)), None)
    sysm = System("AX")
    base = [Node("s1", f, Axiom("Pos"))]
    assert check_proof(Proof(base, (), f, sysm)).status == VERIFIED
    if v is None:
        return
    g2 = substitute_range_var(f, v, Const(v.var, k))
    nodes = base + [Node("s2", g2, Rule("FreeElim", ("s1",)))]
    assert check_proof(Proof(nodes, (), g2, sysm)).status == VERIFIED
    # the closed system has no FreeElim
    assert check_proof(Proof(nodes, (), g2, System("AX", True))).status == REJECTED


# --- corpus -----------------------------------------------------------------

EXPECT = {
    "fin_to_distinct_2": VERIFIED, "fin_to_distinct_3": VERIFIED,
    "distinct_to_sumequals_2": VERIFIED, "distinct_to_sumequals_3": VERIFIED,
    "sumequals_to_fin_2": VERIFIED, "sumequals_to_fin_3": VERIFIED,
    "sum_eq_2": VERIFIED, "sum_of_sums_2": VERIFIED, "mp_chain": VERIFIED,
    "deduction_pair": VERIFIED, "free_hypothesis": VERIFIED,
    "free_deduction_antipattern": REJECTED, "conv_generator": BOUNDED,
    "conv_explicit_50": REJECTED,
}


def test_corpus_is_complete():
    assert set(corpus_names()) == set(EXPECT)


@pytest.mark.parametrize("name", sorted(EXPECT))
def test_corpus_script(name):
    p = derive_corpus(name)
    assert p.expect == EXPECT[name]
    assert check_proof(p).status == EXPECT[name]


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_shipped_scripts_match_builder(name):
    assert format_script(CORPUS[name]()) == format_script(derive_corpus(name))


def test_sum_eq_2_under_named_system():
    p = derive_corpus("sum_eq_2")
    assert check_proof(p, System.parse("AX_2_closed")).status == VERIFIED


def test_antipattern_fails_at_deduction():
    v = check_proof(derive_corpus("free_deduction_antipattern"))
    assert v.rule == "Deduction"


def test_script_round_trip():
    for name in corpus_names():
        p = derive_corpus(name)
        q = parse_script(format_script(p))
        assert [n.formula for n in q.nodes] == [n.formula for n in p.nodes]
        assert check_proof(q).status == check_proof(p).status


def test_corrupted_script_is_rejected():
    text = format_script(derive_corpus("mp_chain"))
    broken = text.replace("FROM s4, s3", "FROM s1, s3")
    assert broken != text
    assert check_proof(parse_script(broken)).status == REJECTED


# --- soundness fuzzing ------------------------------------------------------

CFG = FuzzConfig(trials=150, models_per_class=20, seed=3)


@pytest.fixture(scope="module")
def pool():
    return ModelPool(random.Random("test:models"), CFG)


@pytest.mark.parametrize("schema", ["Fin_N", "Cond", "EqReplace", "SumLower", "Pos", "Lin"])
def test_schema_is_sound(schema, pool):
    rep = soundness_fuzz(schema, CFG, pool)
    assert rep.trials == 150
    assert rep.ok, [v.show() for v in rep.violations[:3]]


@pytest.mark.parametrize("name", sorted(MUTATIONS))
def test_mutation_is_caught(name, pool):
    rep = mutation_fuzz(name, CFG, pool)
    assert rep.violations


@pytest.mark.parametrize("rule", ["MP", "FreeElim", "FreeIntro", "SumUpper"])
def test_rule_local_soundness(rule, pool):
    rep = rule_fuzz(rule, FuzzConfig(trials=80, models_per_class=20, seed=1), pool=pool)
    assert rep.ok
