import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from causalsum.gen import GenConfig, FormulaGen, m_n_model
from causalsum.models import chain_model, frontdoor_model, frontdoor_sequent
from causalsum.parser import parse_formula, parse_sequent, parse_term
from causalsum.scm import Scm, ScmError
from causalsum.semantics import (
    INF, NINF, UNDEF, Evaluator, ExtendedReal, SearchBudget, eval_term, ext_add, ext_ge,
    ext_mul, ext_neg, find_countermodel, satisfies, satisfies_sequent, trace_records,
    valid_in_model,
)
from causalsum.syntax import Add, Geq, Not, Sum, RVar, classify_fragment

import oracles

F = ExtendedReal.of
half = Fraction(1, 2)


def _binary(p1):
    """One variable X over {1, 2} with P(X=1) = p1."""
    exo = ((1, p1), (2, 1 - p1))
    return Scm.from_functions(("X",), {"X": (1, 2)}, {}, exo, {"X": lambda pv, u: u})


# --- extended reals ---------------------------------------------------------


def test_zero_times_infinity():
    assert ext_mul(F(0), INF) == F(0)
    assert ext_mul(INF, F(0)) == F(0)


def test_opposite_infinities_cancel():
    assert ext_add(INF, NINF) == F(0)
    assert ext_add(NINF, INF) == F(0)


def test_undefined_absorbs():
    assert ext_add(UNDEF, F(1)) == UNDEF
    assert ext_mul(UNDEF, F(0)) == UNDEF
    assert ext_neg(UNDEF) == UNDEF


def test_infinity_signs():
    assert ext_mul(F(-2), INF) == NINF
    assert ext_add(INF, F(-5)) == INF
    assert ext_neg(NINF) == INF
    assert ext_ge(INF, F(10**9)) and not ext_ge(NINF, F(-10**9))
    assert not ext_ge(UNDEF, F(0)) and not ext_ge(F(0), UNDEF)


ext_values = st.one_of(
    st.fractions(max_denominator=6).map(F), st.sampled_from([INF, NINF, UNDEF]))


@given(ext_values, ext_values)
def test_ext_commutative(a, b):
    assert ext_add(a, b) == ext_add(b, a)
    assert ext_mul(a, b) == ext_mul(b, a)


@given(ext_values)
def test_ext_units(a):
    assert ext_add(a, F(0)) == a
    assert ext_mul(a, F(1)) == a


# --- terms ------------------------------------------------------------------


def test_p_top_is_one():
    assert eval_term(chain_model(), {}, parse_term("P(true)")) == F(1)


def test_conditional_on_null_event_is_undefined():
    m = _binary(Fraction(1))
    assert eval_term(m, {}, parse_term("P(X=c1 | X=c2)")) == UNDEF


def test_total_probability_over_range():
    rng = random.Random(5)
    for _ in range(10):
        m = m_n_model(rng, ("X", "Y"), 3)
        assert eval_term(m, {}, parse_term("sum x1 . P(X=x1)")) == F(1)


def test_expectation():
    m = _binary(Fraction(1, 3))
    t = parse_term("sum x1 . x1 * P(X=x1)")
    want = Fraction(1, 3) + 2 * Fraction(2, 3)
    assert want == Fraction(5, 3)
    assert eval_term(m, {}, t) == F(want)
    assert oracles.term_value(m, t) == want


def test_trace_keys_and_values():
    m = _binary(Fraction(1, 3))
    recs = list(trace_records(m, parse_term("P(X=x1)"), [{("X", 1): 1}, {("X", 1): 2}]))
    assert recs[0] == {"term": "P(X=x1)", "assignment": {"x1": 1}, "value": "1/3"}
    assert recs[1]["value"] == "2/3"


# --- formulas ---------------------------------------------------------------


def test_undefined_comparison_fails_and_its_negation_holds():
    m = _binary(Fraction(1))
    f = parse_formula("P(X=c1 | X=c2) >= 0")
    assert not satisfies(m, {}, f)
    assert satisfies(m, {}, Not(f))


def test_eq_reflex():
    assert satisfies(chain_model(), {}, parse_formula("c1@X ~ c1@X"))


def test_free_positivity_formula():
    f = parse_formula("P(X=x1) > 0")
    m = _binary(half)
    assert satisfies(m, {("X", 1): 1}, f)
    assert valid_in_model(m, f)
    assert not valid_in_model(_binary(Fraction(1)), f)


def test_missing_assignment_is_an_error():
    with pytest.raises(ScmError):
        satisfies(chain_model(), {}, parse_formula("P(X=x1) > 0"))


def test_closed_validity_is_satisfaction():
    f = parse_formula("P(X=c1) >= 1/2")
    for p in (Fraction(1, 3), half, Fraction(3, 4)):
        m = _binary(p)
        assert valid_in_model(m, f) == satisfies(m, {}, f)


def test_independence_double_loop():
    f = parse_formula("P(X=x1 & Y=y1) == P(X=x1) * P(Y=y1)")
    rng = random.Random(9)
    for _ in range(10):
        m = m_n_model(rng, ("X", "Y"), 2)
        want = all(
            oracles.formula_holds(m, f, {("X", 1): a, ("Y", 1): b})
            for a, b in itertools.product(m.ranges["X"], m.ranges["Y"]))
        assert valid_in_model(m, f) == want


# --- sequents ---------------------------------------------------------------


def test_tautology_sequent():
    seq = parse_sequent("P(X=c1) >= P(X=c1) |- P(X=c1) >= P(X=c1)")
    assert satisfies_sequent(chain_model(), seq)


def test_frontdoor_sequent_holds():
    m = frontdoor_model(random.Random(1))
    assert satisfies_sequent(m, frontdoor_sequent())


def test_violated_premise_makes_sequent_true():
    seq = parse_sequent("P(X=c1) > 1 |- P(X=c1) < 0")
    assert satisfies_sequent(chain_model(), seq)


# --- countermodels ----------------------------------------------------------


def test_countermodel_for_symmetry():
    cm = find_countermodel(parse_sequent("|- P(X=c1) == P(X=c2)"))
    assert cm is not None
    ev = Evaluator(cm.scm)
    assert ev.prob(parse_term("P(X=c1)").event) != ev.prob(parse_term("P(X=c2)").event)


def test_free_variable_sequent_is_not_an_implication():
    # every model where P(X=x1) > 0 holds for all x1 also satisfies the
    # conclusion, yet the implication fails at a single assignment
    seq = parse_sequent("P(X=x1) > 0 |- P(X=x2) > 0")
    budget = SearchBudget(max_range=2, lattice_models=500, random_models=0)
    assert find_countermodel(seq, budget) is None
    implication = parse_sequent("|- P(X=x1) > 0 -> P(X=x2) > 0")
    cm = find_countermodel(implication, budget)
    assert cm is not None
    assert not satisfies(cm.scm, cm.assignment, implication.conclusion)


def test_frontdoor_has_no_countermodel():
    budget = SearchBudget(max_range=2, lattice_models=200, random_models=100, positive=True)
    assert find_countermodel(frontdoor_sequent(), budget) is None
    rng = random.Random(4)
    cands = [frontdoor_model(rng) for _ in range(15)]
    assert find_countermodel(frontdoor_sequent(), budget, candidates=cands) is None


# --- properties -------------------------------------------------------------

CFG = GenConfig(("X", "Y"), 2, max_depth=2, closed=False)


def _pair(seed):
    r = random.Random(seed)
    return m_n_model(r, ("X", "Y"), 2), FormulaGen(r, CFG)


@given(st.integers(0, 10**9))
def test_eval_matches_oracle(seed):
    m, g = _pair(seed)
    iota = {(v, i): random.Random(seed).choice(m.ranges[v]) for v in "XY" for i in (1, 2)}
    t = g.term()
    got = Evaluator(m).term(t, iota)
    want = oracles.term_value(m, t, iota)
    assert (got == UNDEF) == (want is None)
    if want is not None:
        assert got == F(want)
    f = g.formula()
    assert Evaluator(m).sat(f, iota) == oracles.formula_holds(m, f, iota)


@given(st.integers(0, 10**9))
def test_three_valued_comparison(seed):
    m, g = _pair(seed)
    ev = Evaluator(m)
    iota = {(v, i): 1 for v in "XY" for i in (1, 2)}
    left, right = g.term(), g.term()
    if UNDEF in (ev.term(left, iota), ev.term(right, iota)):
        assert not ev.sat(Geq(left, right), iota)
        assert ev.sat(Not(Geq(left, right)), iota)


@given(st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_numerals_evaluate_to_their_value(q):
    f = parse_formula(f"P(true) * ({q.numerator}/{q.denominator}) == {q.numerator}/{q.denominator}")
    assert valid_in_model(chain_model(), f)
    above = parse_formula(f"{q.numerator} >= P(true) * {q.denominator} * {q.numerator}/{q.denominator}")
    assert valid_in_model(chain_model(), above)


@given(st.integers(0, 10**9))
def test_sum_splitting(seed):
    m, g = _pair(seed)
    v = RVar("X", 1)
    g.cfg = GenConfig(("X", "Y"), 2, closed=True)
    t1 = g.term((v,), 1)
    t2 = g.term((v,), 1)
    ev = Evaluator(m)
    whole = ev.term(Sum(v, Add(t1, t2)))
    parts = ext_add(ev.term(Sum(v, t1)), ev.term(Sum(v, t2)))
    assert whole == parts


@given(st.integers(0, 10**9))
def test_positive_models_have_no_undefined_guarded_terms(seed):
    r = random.Random(seed)
    m = m_n_model(r, ("X", "Y"), 2, positive=True)
    g = FormulaGen(r, GenConfig(("X", "Y"), 2, closed=True))
    t = g.term()
    assert classify_fragment(t).cond_guarded
    assert Evaluator(m).term(t) != UNDEF
