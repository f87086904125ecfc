import random

import pytest
from hypothesis import given, strategies as st

from causalsum.gen import FormulaGen, GenConfig, m_n_model, random_formula
from causalsum.grounding import (
    closure_count, eliminate_conditionals, ground_stats, has_conditionals, unfold_sums,
    universal_closure,
)
from causalsum.macros import DenominatorError
from causalsum.models import FRONTDOOR_CONCLUSION, frontdoor_model
from causalsum.parser import parse_formula, parse_term
from causalsum.semantics import Evaluator, UNDEF, satisfies, valid_in_model
from causalsum.syntax import (
    Add, Const, FormulaError, Geq, Mul, RVar, classify_fragment, conjuncts, numeral, size,
    substitute_range_var, zero,
)
from causalsum.syntax import Prob, EAtom

P = lambda v, i: Prob(EAtom(v, Const(v, i)))


def test_unfold_expectation_with_numerals():
    got = unfold_sums(parse_term("sum x1 . x1 * P(X=x1)"), 2, numerals=True)
    want = Add(Mul(numeral(1), P("X", 1)), Mul(numeral(2), P("X", 2)))
    assert got == want


def test_unfold_constant_body():
    got = unfold_sums(parse_term("sum x1 . P(true)"), 3)
    assert got == numeral(3)


def test_unfold_nested():
    t = parse_term("sum x1 . sum y1 . P(X=x1 & Y=y1)")
    g = unfold_sums(t, 2)
    leaves = [n for n in _adds(g)]
    assert len(leaves) == 4
    rng = random.Random(2)
    for _ in range(10):
        m = m_n_model(rng, ("X", "Y"), 2)
        ev = Evaluator(m)
        assert ev.term(g) == ev.term(t)


def _adds(t):
    if isinstance(t, Add):
        yield from _adds(t.left)
        yield from _adds(t.right)
    else:
        yield t


def test_unbounded_signature_cannot_unfold():
    with pytest.raises(FormulaError):
        unfold_sums(parse_term("sum x1 . P(X=x1)"), None)


def test_closure_two_substitutions():
    got = universal_closure(parse_formula("P(X=x1) > 0"), 2)
    assert got == parse_formula("P(X=c1) > 0 & P(X=c2) > 0")


def test_closure_of_closed_formula():
    f = parse_formula("P(X=c1) > 0")
    assert universal_closure(f, 3) is f


def test_closure_two_free_variables():
    f = parse_formula("P(X=x1 & Y=y1) >= P(X=x1) * P(Y=y1)")
    g = universal_closure(f, 2)
    parts = _top_conjuncts(g, 4)
    assert closure_count(f, 2) == 4
    expected = []
    for i in (1, 2):
        for j in (1, 2):
            h = substitute_range_var(f, RVar("X", 1), Const("X", i))
            expected.append(substitute_range_var(h, RVar("Y", 1), Const("Y", j)))
    assert parts == expected


def _top_conjuncts(g, k):
    # the closure is a left-nested conjunction of k instances
    out = []
    for _ in range(k - 1):
        out.append(g.right)
        g = g.left
    out.append(g)
    return out[::-1]


def test_cond_elimination():
    f = parse_formula("P(Y=c1 | X=c2) >= 0")
    g = eliminate_conditionals(f)
    assert g == Geq(parse_term("P(Y=c1 & X=c2)"), Mul(zero(), parse_term("P(X=c2)")))


def test_cond_elimination_identity():
    f = parse_formula("P(Y=c1) >= P(X=c2)")
    assert eliminate_conditionals(f) is f


def test_cond_elimination_frontdoor():
    f = universal_closure(unfold_sums(parse_formula(FRONTDOOR_CONCLUSION), 2), 2)
    g = eliminate_conditionals(f)
    assert has_conditionals(f) and not has_conditionals(g)
    rng = random.Random(8)
    for _ in range(15):
        m = frontdoor_model(rng, {"X": 2, "Z": 2, "Y": 2})
        assert satisfies(m, {}, f) == satisfies(m, {}, g)


def test_zero_is_p_false():
    assert parse_formula("P(X=c1) >= 0").right == Prob(parse_term("P(false)").event)


def test_conditional_under_sum_needs_unfolding():
    f = parse_formula("sum x1 . P(Y=c1 | X=x1) >= 0")
    with pytest.raises(DenominatorError):
        eliminate_conditionals(f)
    eliminate_conditionals(unfold_sums(f, 2))


# --- properties -------------------------------------------------------------


@given(st.integers(0, 10**9), st.sampled_from([2, 3]))
def test_unfolding_preserves_truth(seed, n):
    r = random.Random(seed)
    f = random_formula(r, GenConfig(("X", "Y"), n, max_depth=3, max_sums=2))
    m = m_n_model(r, ("X", "Y"), n)
    ev = Evaluator(m)
    assert ev.sat(f) == ev.sat(unfold_sums(f, n))


@given(st.integers(0, 10**9), st.sampled_from([2, 3]))
def test_closure_soundness(seed, n):
    r = random.Random(seed)
    f = random_formula(r, GenConfig(("X", "Y"), n, closed=False, max_sums=1))
    m = m_n_model(r, ("X", "Y"), n)
    assert valid_in_model(m, f) == satisfies(m, {}, universal_closure(f, n))


@given(st.integers(0, 10**9), st.sampled_from([2, 3]))
def test_size_bound(seed, n):
    f = random_formula(random.Random(seed), GenConfig(("X", "Y"), n, max_depth=3))
    st_ = ground_stats(f, n, numerals=True)
    assert st_.size_out == size(unfold_sums(f, n, numerals=True))
    assert st_.size_out <= st_.bound


@given(st.integers(0, 10**9))
def test_cond_elimination_total_on_positive_models(seed):
    r = random.Random(seed)
    cfg = GenConfig(("X", "Y"), 2, coefficients=False)
    f = unfold_sums(FormulaGen(r, cfg).formula(), 2)
    assert classify_fragment(f).cond_guarded
    g = eliminate_conditionals(f)
    m = m_n_model(r, ("X", "Y"), 2, positive=True)
    ev = Evaluator(m)
    assert ev.sat(f) == ev.sat(g)
    for c in _comparisons(g):
        assert UNDEF not in (ev.term(c.left), ev.term(c.right))


def _comparisons(f):
    if isinstance(f, Geq):
        yield f
    for s in ("arg", "left", "right"):
        c = getattr(f, s, None)
        if c is not None and not isinstance(f, Geq):
            yield from _comparisons(c)


@given(st.integers(0, 10**9))
def test_guarded_elimination_is_exact_everywhere(seed):
    r = random.Random(seed)
    cfg = GenConfig(("X", "Y"), 2, coefficients=False)
    f = unfold_sums(FormulaGen(r, cfg).formula(), 2)
    g = eliminate_conditionals(f, guard=True)
    m = m_n_model(r, ("X", "Y"), 2)
    assert Evaluator(m).sat(f) == Evaluator(m).sat(g)
