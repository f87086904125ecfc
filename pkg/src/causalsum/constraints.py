"""Polynomial constraint systems and a small exact feasibility search.

A :class:`ConstraintSystem` is a Boolean combination of comparisons
``poly >= 0``, ``poly > 0`` and ``poly == 0`` over a handful of unknowns. In
``simplex`` mode the unknowns are probabilities (non-negative, or strictly
positive, summing to one); in ``free`` mode they range over the reals.

The search enumerates rational points with a common denominator d <= D and
prunes partial assignments with interval arithmetic. A branch-and-bound pass
over real boxes can also prove a system infeasible outright. Any witness is
checked exactly before it is returned.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Sparse polynomial with rational coefficients; monomials are exponent
    tuples of length ``n``."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {m: Fraction(c) for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def const(cls, n: int, c) -> "Poly":
        return cls(n, {(0,) * n: Fraction(c)})

    @classmethod
    def var(cls, n: int, i: int) -> "Poly":
        m = [0] * n
        m[i] = 1
        return cls(n, {tuple(m): Fraction(1)})

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(self.n, out)

    def __neg__(self) -> "Poly":
        return Poly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(self.n, out)

    def scale(self, k) -> "Poly":
        return Poly(self.n, {m: c * k for m, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, Poly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def is_const(self) -> bool:
        return all(not any(m) for m in self.terms)

    def const_value(self) -> Fraction:
        return self.terms.get((0,) * self.n, Fraction(0))

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v *= x ** e
            total += v
        return total

    def substitute(self, i: int, q: "Poly") -> "Poly":
        """Replace variable i by q."""
        out = Poly(self.n)
        powers = {0: Poly.const(self.n, 1)}
        for m, c in self.terms.items():
            e = m[i]
            if e not in powers:
                p = powers[max(powers)]
                for _ in range(e - max(powers)):
                    p = p * q
                powers[e] = p
            rest = list(m)
            rest[i] = 0
            out = out + Poly(self.n, {tuple(rest): c}) * powers[e]
        return out

    def interval(self, box) -> tuple:
        lo, hi = Fraction(0), Fraction(0)
        for m, c in self.terms.items():
            iv = (c, c)
            for (a, b), e in zip(box, m):
                if e:
                    iv = _imul(iv, _ipow((a, b), e))
            lo = _iadd_end(lo, iv[0])
            hi = _iadd_end(hi, iv[1])
        return lo, hi

    def lcm_denominator(self) -> int:
        from math import lcm
        out = 1
        for c in self.terms.values():
            out = lcm(out, c.denominator)
        return out

    def __repr__(self):
        return f"Poly({self.n}, {self.terms})"

    def show(self, names=None) -> str:
        names = names or [f"p{i}" for i in range(self.n)]
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(names[i] + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)


# Interval endpoints are Fractions or None (unbounded on that side).


def _iadd_end(a, b):
    if a is None or b is None:
        return None
    return a + b


def _imul(x: tuple, y: tuple) -> tuple:
    cands = [_ext_mul(a, sa, b, sb)
             for a, sa in ((x[0], -1), (x[1], 1))
             for b, sb in ((y[0], -1), (y[1], 1))]
    finite = [c for c in cands if not isinstance(c, str)]
    lo = None if ("-inf" in cands or not finite) else min(finite)
    hi = None if ("inf" in cands or not finite) else max(finite)
    return lo, hi


def _ext_mul(a, sa, b, sb):
    """Product of two endpoints where None means infinity of sign sa / sb."""
    if a is None and b is None:
        return "inf" if sa * sb > 0 else "-inf"
    if a is None:
        if b == 0:
            return Fraction(0)
        return "inf" if sa * (1 if b > 0 else -1) > 0 else "-inf"
    if b is None:
        if a == 0:
            return Fraction(0)
        return "inf" if sb * (1 if a > 0 else -1) > 0 else "-inf"
    return a * b


def _ipow(x: tuple, e: int) -> tuple:
    if e == 1:
        return x
    lo, hi = x
    if e % 2 == 1:
        return (None if lo is None else lo ** e, None if hi is None else hi ** e)
    # even power
    if lo is not None and lo >= 0:
        return (lo ** e, None if hi is None else hi ** e)
    if hi is not None and hi <= 0:
        return (hi ** e, None if lo is None else lo ** e)
    if lo is None or hi is None:
        return (Fraction(0), None)
    return (Fraction(0), max(lo ** e, hi ** e))


# ---------------------------------------------------------------------------
# Boolean structure


@dataclass(frozen=True)
class BConst:
    value: bool


@dataclass(frozen=True)
class BAtom:
    poly: Poly
    op: str  # ">=", ">", "=="

    def __post_init__(self):
        if self.op not in (">=", ">", "=="):
            raise ValueError(f"bad comparison {self.op}")


@dataclass(frozen=True)
class BNot:
    arg: object


@dataclass(frozen=True)
class BAnd:
    args: tuple


@dataclass(frozen=True)
class BOr:
    args: tuple


TRUE = BConst(True)
FALSE = BConst(False)


def b_not(a):
    if isinstance(a, BConst):
        return BConst(not a.value)
    if isinstance(a, BNot):
        return a.arg
    return BNot(a)


def b_and(*args):
    flat = []
    for a in args:
        if isinstance(a, BConst):
            if not a.value:
                return FALSE
            continue
        if isinstance(a, BAnd):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else BAnd(tuple(flat))


def b_or(*args):
    flat = []
    for a in args:
        if isinstance(a, BConst):
            if a.value:
                return TRUE
            continue
        if isinstance(a, BOr):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else BOr(tuple(flat))


def atom(poly: Poly, op: str):
    """Comparison ``poly op 0`` folded to a constant when poly is constant."""
    if poly.is_const():
        c = poly.const_value()
        return BConst(c >= 0 if op == ">=" else c > 0 if op == ">" else c == 0)
    return BAtom(poly, op)


def b_eval(f, point) -> bool:
    if isinstance(f, BConst):
        return f.value
    if isinstance(f, BAtom):
        v = f.poly.evaluate(point)
        return v >= 0 if f.op == ">=" else v > 0 if f.op == ">" else v == 0
    if isinstance(f, BNot):
        return not b_eval(f.arg, point)
    if isinstance(f, BAnd):
        return all(b_eval(a, point) for a in f.args)
    if isinstance(f, BOr):
        return any(b_eval(a, point) for a in f.args)
    raise TypeError(f"not a Boolean node: {f!r}")


def b_interval(f, box):
    """Three-valued truth (True / False / None) over a box."""
    if isinstance(f, BConst):
        return f.value
    if isinstance(f, BAtom):
        lo, hi = f.poly.interval(box)
        if f.op == ">=":
            if lo is not None and lo >= 0:
                return True
            if hi is not None and hi < 0:
                return False
            return None
        if f.op == ">":
            if lo is not None and lo > 0:
                return True
            if hi is not None and hi <= 0:
                return False
            return None
        if lo is not None and hi is not None and lo == 0 and hi == 0:
            return True
        if (lo is not None and lo > 0) or (hi is not None and hi < 0):
            return False
        return None
    if isinstance(f, BNot):
        v = b_interval(f.arg, box)
        return None if v is None else not v
    if isinstance(f, BAnd):
        unknown = False
        for a in f.args:
            v = b_interval(a, box)
            if v is False:
                return False
            if v is None:
                unknown = True
        return None if unknown else True
    if isinstance(f, BOr):
        unknown = False
        for a in f.args:
            v = b_interval(a, box)
            if v is True:
                return True
            if v is None:
                unknown = True
        return None if unknown else False
    raise TypeError(f"not a Boolean node: {f!r}")


def b_atoms(f) -> Iterator[BAtom]:
    if isinstance(f, BAtom):
        yield f
    elif isinstance(f, BNot):
        yield from b_atoms(f.arg)
    elif isinstance(f, (BAnd, BOr)):
        for a in f.args:
            yield from b_atoms(a)


def b_show(f, names=None) -> str:
    if isinstance(f, BConst):
        return "true" if f.value else "false"
    if isinstance(f, BAtom):
        return f"{f.poly.show(names)} {f.op} 0"
    if isinstance(f, BNot):
        return f"!({b_show(f.arg, names)})"
    if isinstance(f, BAnd):
        return "(" + " & ".join(b_show(a, names) for a in f.args) + ")"
    return "(" + " | ".join(b_show(a, names) for a in f.args) + ")"


# ---------------------------------------------------------------------------
# systems and search


@dataclass(frozen=True)
class ConstraintSystem:
    n: int
    formula: object
    mode: str = "simplex"  # or "free"
    strict: bool = False   # simplex only: unknowns strictly positive
    names: tuple = ()

    def __post_init__(self):
        if self.mode not in ("simplex", "free"):
            raise ValueError(f"unknown mode {self.mode}")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"p{i}" for i in range(self.n)))

    def side_conditions(self):
        """Simplex rows as explicit atoms (empty in free mode)."""
        if self.mode == "free":
            return TRUE
        rows = [atom(Poly.var(self.n, i), ">" if self.strict else ">=") for i in range(self.n)]
        total = Poly.const(self.n, 0)
        for i in range(self.n):
            total = total + Poly.var(self.n, i)
        rows.append(atom(total - Poly.const(self.n, 1), "=="))
        return b_and(*rows)

    def full_formula(self):
        return b_and(self.side_conditions(), self.formula)

    def check(self, point) -> bool:
        return len(point) == self.n and b_eval(self.full_formula(), point)


@dataclass(frozen=True)
class SolveResult:
    status: str  # "witness" | "infeasible" | "no-witness-at-bound" | "budget"
    witness: tuple | None = None
    evaluations: int = 0
    denominator: int | None = None

    @property
    def found(self) -> bool:
        return self.status == "witness"


class CapExceeded(RuntimeError):
    pass


MAX_UNKNOWNS = 64


def _reduced(cs: ConstraintSystem):
    """Simplex systems with p_last eliminated through the normalization row."""
    n = cs.n
    if n == 0:
        return cs.full_formula()
    rest = Poly.const(n, 1)
    for i in range(n - 1):
        rest = rest - Poly.var(n, i)
    f = _subst_formula(cs.formula, n - 1, rest)
    pos = [atom(Poly.var(n, i), ">" if cs.strict else ">=") for i in range(n - 1)]
    pos.append(atom(rest, ">" if cs.strict else ">="))
    return b_and(*pos, f)


def _subst_formula(f, i, q):
    if isinstance(f, BAtom):
        return atom(f.poly.substitute(i, q), f.op)
    if isinstance(f, BNot):
        return b_not(_subst_formula(f.arg, i, q))
    if isinstance(f, BAnd):
        return b_and(*(_subst_formula(a, i, q) for a in f.args))
    if isinstance(f, BOr):
        return b_or(*(_subst_formula(a, i, q) for a in f.args))
    return f


def _split(lo, hi):
    if lo is None and hi is None:
        m = Fraction(0)
    elif lo is None:
        m = Fraction(0) if hi > 0 else 2 * hi - 1
    elif hi is None:
        m = Fraction(0) if lo < 0 else 2 * lo + 1
    else:
        m = (lo + hi) / 2
    return (lo, m), (m, hi)


def prove_infeasible(cs: ConstraintSystem, max_boxes: int = 4000) -> bool:
    """Branch and bound over real boxes; True only if every box is refuted."""
    if cs.mode == "simplex":
        f = _reduced(cs)
        if cs.n == 0:
            return f == FALSE
        box = [(Fraction(0), Fraction(1))] * (cs.n - 1) + [(Fraction(0), Fraction(0))]
        dims = cs.n - 1
    else:
        f = cs.formula
        box = [(None, None)] * cs.n
        dims = cs.n
    if linear_refutes(f, cs.n):
        return True
    stack = [(tuple(box), 0)]
    seen = 0
    while stack:
        b, k = stack.pop()
        seen += 1
        if seen > max_boxes:
            return False
        v = b_interval(f, b)
        if v is False:
            continue
        if v is True or dims == 0:
            return False
        # split the widest (or an unbounded) coordinate
        j = _widest(b, dims)
        if j is None:
            return False
        left, right = _split(*b[j])
        for half in (right, left):
            nb = list(b)
            nb[j] = half
            stack.append((tuple(nb), k + 1))
    return True


def linear_refutes(f, n: int, max_rows: int = 2000) -> bool:
    """Fourier-Motzkin on the linear top-level conjuncts of ``f``.

    Dropping the other conjuncts only weakens the system, so an exact
    contradiction among the linear ones refutes ``f``. Rows are
    ``(coeffs, const, strict)`` meaning ``coeffs·x + const (>|>=) 0``.
    """
    parts = f.args if isinstance(f, BAnd) else (f,)
    rows = []
    for a in parts:
        if isinstance(a, BConst):
            if not a.value:
                return True
            continue
        if isinstance(a, BNot) and isinstance(a.arg, BAtom) and a.arg.op != "==":
            a = BAtom(-a.arg.poly, ">" if a.arg.op == ">=" else ">=")
        if not isinstance(a, BAtom) or a.poly.degree() > 1:
            continue
        coeffs = [Fraction(0)] * n
        const = Fraction(0)
        for exps, c in a.poly.terms.items():
            if not any(exps):
                const = c
            else:
                coeffs[exps.index(1)] = c
        if a.op == "==":
            rows.append((coeffs, const, False))
            rows.append(([-c for c in coeffs], -const, False))
        else:
            rows.append((coeffs, const, a.op == ">"))
    if not rows:
        return False
    for j in range(n):
        pos = [r for r in rows if r[0][j] > 0]
        neg = [r for r in rows if r[0][j] < 0]
        keep = [r for r in rows if r[0][j] == 0]
        if len(keep) + len(pos) * len(neg) > max_rows:
            return False
        for cp, kp, sp in pos:
            for cn, kn, sn in neg:
                a, b = -cn[j], cp[j]
                keep.append(([a * x + b * y for x, y in zip(cp, cn)], a * kp + b * kn, sp or sn))
        rows = keep
    return any(k < 0 or (k == 0 and s) for _, k, s in rows)


def _widest(box, dims):
    best, width = None, Fraction(-1)
    for j in range(dims):
        lo, hi = box[j]
        if lo is None or hi is None:
            return j
        if hi - lo > width:
            best, width = j, hi - lo
    if width <= Fraction(1, 1 << 20):
        return None
    return best


def solve_constraints_small(cs: ConstraintSystem, D: int = 16, bound: int = 4,
                            max_evals: int = 2_000_000, prune: bool = True) -> SolveResult:
    """Search rational points with common denominator d <= D.

    Simplex mode: p_i = k_i/d with sum k_i = d (k_i >= 1 when strict).
    Free mode: x_i = k_i/d with |x_i| <= bound.
    """
    if cs.n > MAX_UNKNOWNS:
        raise CapExceeded(f"{cs.n} unknowns exceeds the cap of {MAX_UNKNOWNS}")
    if prune and prove_infeasible(cs):
        return SolveResult("infeasible")
    full = cs.full_formula()
    evals = 0
    for d in range(1, D + 1):
        if cs.mode == "simplex" and cs.strict and d < cs.n:
            continue
        found, evals = _search(cs, full, d, bound, evals, max_evals, prune)
        if found is not None:
            if not cs.check(found):
                raise AssertionError("search returned a point that fails exact verification")
            return SolveResult("witness", found, evals, d)
        if evals >= max_evals:
            return SolveResult("budget", None, evals)
    return SolveResult("no-witness-at-bound", None, evals)


def _search(cs, full, d, bound, evals, max_evals, prune):
    n = cs.n
    if n == 0:
        evals += 1
        return ((), evals) if b_eval(full, ()) else (None, evals)
    simplex = cs.mode == "simplex"
    low = 1 if (simplex and cs.strict) else 0
    fd = Fraction(1, d)
    point = [Fraction(0)] * n
    box = [None] * n

    def rec(i, remaining):
        nonlocal evals
        if evals >= max_evals:
            return None
        if simplex and i == n - 1:
            if remaining < low:
                return None
            point[i] = remaining * fd
            evals += 1
            return tuple(point) if b_eval(full, point) else None
        if i == n:
            evals += 1
            return tuple(point) if b_eval(full, point) else None
        if simplex:
            choices = range(low, remaining - low * (n - 1 - i) + 1)
        else:
            choices = _signed_range(bound * d)
        for k in choices:
            point[i] = k * fd
            box[i] = (point[i], point[i])
            if prune and i < n - 1:
                for j in range(i + 1, n):
                    if simplex:
                        box[j] = (low * fd, (remaining - k - low * (n - 2 - i)) * fd)
                    else:
                        box[j] = (Fraction(-bound), Fraction(bound))
                evals += 1
                if b_interval(full, box) is False:
                    continue
            out = rec(i + 1, remaining - k if simplex else 0)
            if out is not None:
                return out
            if evals >= max_evals:
                return None
        return None

    return rec(0, d), evals


def _signed_range(m: int):
    yield 0
    for k in range(1, m + 1):
        yield k
        yield -k


def grid_points(cs: ConstraintSystem, D: int, bound: int = 4) -> Iterator[tuple]:
    """Every grid point the search ranges over (oracle for tests; no pruning)."""
    seen = set()
    for d in range(1, D + 1):
        if cs.mode == "simplex":
            low = 1 if cs.strict else 0
            for comp in _compositions(d, cs.n, low):
                p = tuple(Fraction(k, d) for k in comp)
                if p not in seen:
                    seen.add(p)
                    yield p
        else:
            for ks in itertools.product(range(-bound * d, bound * d + 1), repeat=cs.n):
                p = tuple(Fraction(k, d) for k in ks)
                if p not in seen:
                    seen.add(p)
                    yield p


def _compositions(total, parts, low):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= low:
            yield (total,)
        return
    for k in range(low, total - low * (parts - 1) + 1):
        for rest in _compositions(total - k, parts - 1, low):
            yield (k,) + rest
