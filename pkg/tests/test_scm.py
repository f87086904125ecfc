import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from causalsum.gen import m_n_model
from causalsum.models import chain_model, cwc_models, frontdoor_model, random_pmf
from causalsum.parser import parse_event
from causalsum.scm import (
    Scm, ScmError, apply_intervention, check_positivity, event_probability,
    identity_constants, induced_influences, joint_distribution, solve, validate,
)
from causalsum.syntax import EAtom, ETop, Const, e_or, EAnd

import oracles

half = Fraction(1, 2)


def _reordered_chain():
    m = chain_model()
    return Scm(("Y", "X"), m.ranges, m.parents, m.exo, m.tables, m.constants)


def test_chain_validates():
    assert validate(chain_model()).ok


def test_recursiveness_violation_has_witness():
    rep = validate(_reordered_chain())
    assert not rep.ok
    assert rep.first.kind == "recursive"
    assert rep.first.witness is not None


def test_normalization_violation():
    m = chain_model((Fraction(2, 3), half))
    rep = validate(m)
    assert rep.first.kind == "pmf"
    assert "7/6" in rep.first.message


def test_table_value_outside_range():
    m = chain_model()
    tables = dict(m.tables)
    tables["Y"] = {**tables["Y"], ((1,), 1): 3}
    rep = validate(Scm(m.variables, m.ranges, m.parents, m.exo, tables, m.constants))
    assert rep.first.kind == "table"


def test_intervene_sets_constant_table():
    m = apply_intervention(chain_model(), {"X": 1})
    assert set(m.tables["X"].values()) == {1}
    assert m.parents["X"] == ()


def test_empty_intervention_is_identity():
    m = chain_model()
    assert apply_intervention(m, {}) == m


def test_intervention_override():
    m = chain_model()
    twice = apply_intervention(apply_intervention(m, {"X": 1}), {"X": 2})
    once = apply_intervention(m, {"X": 2})
    assert twice.tables == once.tables


def test_intervention_outside_range():
    with pytest.raises(ScmError):
        apply_intervention(chain_model(), {"X": 5})


def test_solve_chain():
    assert solve(chain_model(), 2) == {"X": 2, "Y": 2}


def test_solve_constant_model():
    exo = ((1, half), (2, half))
    m = Scm.from_functions(("X",), {"X": (1, 2)}, {}, exo, {"X": lambda pv, u: 2})
    assert all(solve(m, u) == {"X": 2} for u in (1, 2))


def test_solve_matches_fixed_point(rng):
    for _ in range(20):
        m = m_n_model(rng, ("X", "Y", "Z"), 2)
        for u in m.outcomes:
            assert solve(m, u) == oracles.fixed_point(m, u)
            assert solve(m, u, {"Y": 1}) == oracles.fixed_point(m, u, {"Y": 1})


def test_prob_top():
    assert event_probability(chain_model(), ETop()) == 1


def test_cwc_causal_probabilities():
    m, m2 = cwc_models()
    # by hand: in the first model V2 ignores V1, so both sides are 1/2
    a = event_probability(m, parse_event("[V1=c2] V2=c2"))
    b = event_probability(m, parse_event("[V1=c2] V2=c1"))
    assert a == b == half
    # in the second, V1 := 1 gives V2 = U1 + [U1=0, U2=1]: 3/4 versus 1/4
    a2 = event_probability(m2, parse_event("[V1=c2] V2=c2"))
    b2 = event_probability(m2, parse_event("[V1=c2] V2=c1"))
    assert (a2, b2) == (Fraction(3, 4), Fraction(1, 4))
    assert joint_distribution(m) == joint_distribution(m2)


def test_counterfactual_conjunction_on_chain():
    e = parse_event("[X=c1] Y=c1 & [X=c2] Y=c2")
    assert event_probability(chain_model(), e) == 1
    assert oracles.probability(chain_model(), e) == 1


def test_influences_examples(rng):
    assert induced_influences(chain_model()) == {("X", "Y")}
    exo = ((1, half), (2, half))
    indep = Scm.from_functions(("X", "Y"), {"X": (1, 2), "Y": (1, 2)}, {}, exo,
                               {"X": lambda pv, u: u, "Y": lambda pv, u: 3 - u})
    assert induced_influences(indep) == set()
    fd = frontdoor_model(random.Random(3))
    want = oracles.influences(fd)
    assert {("X", "Z"), ("Z", "Y"), ("X", "Y")} <= want
    assert induced_influences(fd) == want


def test_positivity_examples():
    exo = ((1, Fraction(1)),)
    degenerate = Scm.from_functions(("X",), {"X": (1, 2)}, {}, exo, {"X": lambda pv, u: 1})
    assert not check_positivity(degenerate)
    exo = ((1, half), (2, half))
    uniform = Scm.from_functions(("X",), {"X": (1, 2)}, {}, exo, {"X": lambda pv, u: u})
    assert check_positivity(uniform)


def test_frontdoor_models_are_positive():
    r = random.Random(11)
    for _ in range(20):
        m = frontdoor_model(r)
        dist = joint_distribution(m)
        cells = 1
        for v in m.variables:
            cells *= len(m.ranges[v])
        assert len(dist) == cells and min(dist.values()) > 0
        assert check_positivity(m)


def test_identity_constants():
    assert identity_constants({"X": (3, 1)}) == {"X": {1: 1, 2: 3}}


# --- properties -------------------------------------------------------------


def _model(seed, positive=False):
    r = random.Random(seed)
    return m_n_model(r, ("X", "Y", "Z"), r.choice((2, 3)), positive=positive)


@given(st.integers(0, 10**9), st.sampled_from([{}, {"X": 1}, {"Y": 2}, {"X": 2, "Z": 1}]))
def test_interventional_joint_sums_to_one(seed, alpha):
    m = _model(seed)
    alpha = {k: min(v, len(m.ranges[k])) for k, v in alpha.items()}
    assert sum(joint_distribution(m, alpha).values()) == 1


@given(st.integers(0, 10**9), st.integers(0, 10**6))
def test_event_additivity(seed, eseed):
    m = _model(seed)
    r = random.Random(eseed)

    def ev():
        v = r.choice(m.variables)
        a = EAtom(v, Const(v, r.randint(1, 2)))
        return a if r.random() < 0.7 else EAnd(a, EAtom("Z", Const("Z", 1)))

    d, d2 = ev(), ev()
    p = lambda e: event_probability(m, e)
    assert p(e_or(d, d2)) + p(EAnd(d, d2)) == p(d) + p(d2)
    assert p(e_or(d, d2)) >= max(p(d), p(d2))


@given(st.integers(0, 10**9), st.sampled_from(["X", "Y", "Z"]), st.integers(1, 2))
def test_intervened_variable_reads_back(seed, var, val):
    m = _model(seed)
    e = parse_event(f"[{var}=c{val}] {var}=c{val}")
    assert event_probability(m, e) == 1


@given(st.integers(0, 10**9))
def test_influences_respect_order(seed):
    m = _model(seed)
    rank = {v: i for i, v in enumerate(m.variables)}
    for vi, vj in induced_influences(m):
        assert rank[vi] < rank[vj]


@given(st.integers(0, 10**9))
def test_probability_matches_oracle(seed):
    m = _model(seed)
    r = random.Random(seed)
    v, w = r.sample(m.variables, 2)
    e = parse_event(f"[{v}=c1] {w}=c2 & !{v}=c2")
    assert event_probability(m, e) == oracles.probability(m, e)


def test_random_pmf_is_positive(rng):
    for n in range(1, 7):
        p = random_pmf(rng, n)
        assert sum(p) == 1 and min(p) > 0
