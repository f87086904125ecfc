import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from causalsum.constraints import (
    ConstraintSystem, Poly, atom, b_and, b_eval, b_not, b_or, linear_refutes, prove_infeasible,
    solve_constraints_small,
)

import oracles

half = Fraction(1, 2)


def _vars(n):
    return [Poly.var(n, i) for i in range(n)]


def _c(n, q):
    return Poly.const(n, q)


def test_simplex_half_half():
    p1, _ = _vars(2)
    cs = ConstraintSystem(2, atom(p1 - _c(2, half), ">="), "simplex", strict=True)
    res = solve_constraints_small(cs, D=2)
    assert res.witness == (half, half)


def test_contradiction_with_normalization():
    p1, p2 = _vars(2)
    f = b_and(atom(p1 - _c(2, 1), ">"), atom(p2, ">="))
    cs = ConstraintSystem(2, f, "simplex")
    assert prove_infeasible(cs)
    for D in (1, 4, 16):
        assert not solve_constraints_small(cs, D=D).found
        assert solve_constraints_small(cs, D=D, prune=False).status == "no-witness-at-bound"


def test_product_constraint():
    p1, p2 = _vars(2)
    f = b_and(atom(p1 * p2 - _c(2, Fraction(1, 4)), ">="), atom(p1 + p2 - _c(2, 1), "=="))
    cs = ConstraintSystem(2, f, "free")
    res = solve_constraints_small(cs, D=4)
    assert res.witness == (half, half)
    grid = [pt for pt in oracles.box_grid(2, 4, 4) if b_eval(f, pt)]
    assert grid == [(half, half)]


def test_boolean_folding():
    n = 1
    x = Poly.var(n, 0)
    t = atom(_c(n, 1), ">")
    assert b_and(t, atom(x, ">=")) == atom(x, ">=")
    assert b_or(b_not(t), atom(x, ">")) == atom(x, ">")


def test_fourier_motzkin_refutes_linear_system():
    p1, p2 = _vars(2)
    f = b_and(atom(p1 - p2, ">"), atom(p2 - p1, ">"))
    assert linear_refutes(f, 2)


def _random_system(seed):
    r = random.Random(seed)
    n = r.choice((1, 2))
    xs = _vars(n)
    parts = []
    for _ in range(r.randint(1, 2)):
        p = _c(n, Fraction(r.randint(-3, 3), r.randint(1, 3)))
        for x in xs:
            coeff = _c(n, r.randint(-2, 2))
            p = p + coeff * x
            if r.random() < 0.4:
                p = p + coeff * x * x
        parts.append(atom(p, r.choice((">=", ">", "=="))))
    f = b_and(*parts) if r.random() < 0.7 else b_or(*parts)
    mode = r.choice(("free", "simplex"))
    if mode == "free":
        return ConstraintSystem(n, f, mode)
    return ConstraintSystem(n + 1, _lift(f, n), mode)


def _lift(f, n):
    # reinterpret n-variable polynomials over n + 1 simplex unknowns
    from causalsum.constraints import BAnd, BAtom, BConst, BOr
    if isinstance(f, BAtom):
        return BAtom(Poly(n + 1, {m + (0,): c for m, c in f.poly.terms.items()}), f.op)
    if isinstance(f, BAnd):
        return BAnd(tuple(_lift(a, n) for a in f.args))
    if isinstance(f, BOr):
        return BOr(tuple(_lift(a, n) for a in f.args))
    return f


@given(st.integers(0, 10**9), st.integers(1, 4))
def test_search_agrees_with_grid_oracle(seed, D):
    cs = _random_system(seed)
    res = solve_constraints_small(cs, D=D, bound=2, prune=False)
    if cs.mode == "free":
        pts = oracles.box_grid(cs.n, D, 2)
    else:
        pts = oracles.simplex_grid(cs.n, D)
    any_pt = any(cs.check(pt) for pt in pts)
    assert res.found == any_pt
    if res.found:
        assert cs.check(res.witness)


@settings(max_examples=25)
@given(st.integers(0, 10**9), st.integers(1, 4))
def test_pruning_is_sound(seed, D):
    cs = _random_system(seed)
    if prove_infeasible(cs):
        pts = oracles.box_grid(cs.n, D, 2) if cs.mode == "free" else oracles.simplex_grid(cs.n, D)
        assert not any(cs.check(pt) for pt in pts)
    assert solve_constraints_small(cs, D=D, bound=2).found == \
        solve_constraints_small(cs, D=D, bound=2, prune=False).found


@given(st.lists(st.fractions(-3, 3, max_denominator=4), min_size=2, max_size=2),
       st.lists(st.fractions(-3, 3, max_denominator=4), min_size=2, max_size=2))
def test_poly_ring(a, b):
    x, y = _vars(2)
    p = x * x + _c(2, 2) * y - _c(2, 1)
    q = x * y + _c(2, half)
    for pt in (a, b):
        assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
        assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)
