"""Model generators and the formulas of the identification examples.

Value conventions: ranges are ``1..k``. Where the textbook uses binary 0/1
values (or minus/plus), value ``1`` plays the role of 0/minus and ``2`` the
role of 1/plus, so that ``c1`` and ``c2`` denote them under the identity
constant interpretation.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .parser import parse_formula, parse_sequent
from .scm import Scm, identity_constants
from .syntax import Sequent


def random_pmf(rng: random.Random, n: int, max_denominator: int = 24) -> list:
    """Strictly positive pmf with ``n`` entries from a random integer
    composition of ``d`` (``n <= d <= max(n, max_denominator)``)."""
    d = rng.randint(n, max(n, max_denominator))
    cuts = sorted(rng.sample(range(1, d), n - 1)) if n > 1 else []
    pts = [0] + cuts + [d]
    return [Fraction(pts[i + 1] - pts[i], d) for i in range(n)]


def product_exo(*factors) -> tuple:
    """Independent product of ``[(outcome, weight), ...]`` factors."""
    out = []
    for combo in itertools.product(*factors):
        w = Fraction(1)
        for _, x in combo:
            w *= x
        out.append((tuple(u for u, _ in combo), w))
    return tuple(out)


# ---------------------------------------------------------------------------
# front door: U -> X, U -> Y, X -> Z, Z -> Y

FRONTDOOR_PREMISES = (
    "P([X=x1] Z=z1) == P(Z=z1 | X=x1)",
    "P([Z=z1] X=x1) == P(X=x1)",
    "P([X=x1] Y=y1 | [X=x1] Z=z1) == P([X=x1, Z=z1] Y=y1)",
    "P([X=x1, Z=z1] Y=y1) == P([Z=z1] Y=y1)",
    "P([Z=z1] Y=y1 | [Z=z1] X=x1) == P(Y=y1 | X=x1 & Z=z1)",
)
FRONTDOOR_CONCLUSION = (
    "P([X=x1] Y=y1) == sum z1 . P(Z=z1 | X=x1) * sum x2 . P(Y=y1 | X=x2 & Z=z1) * P(X=x2)"
)


def frontdoor_sequent() -> Sequent:
    return parse_sequent("; ".join(FRONTDOOR_PREMISES) + " |- " + FRONTDOOR_CONCLUSION)


def frontdoor_model(rng: random.Random, sizes: dict | None = None,
                    max_denominator: int = 24) -> Scm:
    """Random positive model with the front-door structure.

    The confounder is ``u_c = (x, y, b)``: X reads x; Y reads y when b = 0 and a
    random table of (Z, y) when b = 1. Z's noise ``u_z = (z, b)`` is independent
    of ``u_c``: Z reads z when b = 0 and a random table of (X, z) otherwise.
    The b = 0 branches make every joint cell reachable, so the model is positive.
    """
    sizes = sizes or {v: rng.choice((2, 3)) for v in "XZY"}
    ranges = {v: tuple(range(1, sizes[v] + 1)) for v in "XZY"}
    uc = list(itertools.product(ranges["X"], ranges["Y"], (0, 1)))
    uz = list(itertools.product(ranges["Z"], (0, 1)))
    exo = product_exo(list(zip(uc, random_pmf(rng, len(uc), max_denominator))),
                      list(zip(uz, random_pmf(rng, len(uz), max_denominator))))
    z_tab = {(x, z): rng.choice(ranges["Z"]) for x in ranges["X"] for z in ranges["Z"]}
    y_tab = {(z, y): rng.choice(ranges["Y"]) for z in ranges["Z"] for y in ranges["Y"]}

    def f_x(pv, u):
        return u[0][0]

    def f_z(pv, u):
        z, b = u[1]
        return z if b == 0 else z_tab[(pv[0], z)]

    def f_y(pv, u):
        _, y, b = u[0]
        return y if b == 0 else y_tab[(pv[0], y)]

    return Scm.from_functions(("X", "Z", "Y"), ranges,
                              {"X": (), "Z": ("X",), "Y": ("Z",)}, exo,
                              {"X": f_x, "Z": f_z, "Y": f_y})


# ---------------------------------------------------------------------------
# local average treatment effect: Z (assignment) -> X (treatment) -> Y

LATE_PREMISES = (
    "!(y1 ~ y2) -> P([X=x1, Z=c2] Y=y1 & [X=x1, Z=c1] Y=y2) == 0",
    "P([Z=c2] X=c1 & [Z=c1] X=c2) == 0",
)
LATE_COMPLIERS = "[Z=c2] X=c2 & [Z=c1] X=c1"
LATE_EFFECT = f"sum y1 . sum y2 . (y1 - y2) * P([X=c2] Y=y1 & [X=c1] Y=y2 | {LATE_COMPLIERS})"
# a sum's body extends to the right, hence the parentheses
LATE_NUMERATOR = "(sum y1 . y1 * P([Z=c2] Y=y1)) - (sum y1 . y1 * P([Z=c1] Y=y1))"
LATE_DENOMINATOR = "(sum x1 . x1 * P([Z=c2] X=x1)) - (sum x1 . x1 * P([Z=c1] X=x1))"
LATE_CONCLUSION = f"{LATE_EFFECT} == ({LATE_NUMERATOR}) / ({LATE_DENOMINATOR})"


def late_sequent() -> Sequent:
    return parse_sequent("; ".join(LATE_PREMISES) + " |- " + LATE_CONCLUSION)


# response types of X to Z: (value at z=1, value at z=2)
NEVER, COMPLIER, ALWAYS, DEFIER = (1, 1), (1, 2), (2, 2), (2, 1)


@dataclass(frozen=True)
class LateModel:
    scm: Scm
    defiers: bool
    exclusion: bool


def late_model(rng: random.Random, defiers: bool = False, exclusion: bool = True,
               max_denominator: int = 24) -> LateModel:
    """Binary model for the instrument example.

    The exogenous outcome is ``(z, x_type, y_type)``. Z reads z; X applies its
    response type to Z; Y applies a table to X (and to Z as well when
    ``exclusion`` is off). ``(x_type, y_type)`` has an arbitrary joint pmf, so
    treatment and outcome stay confounded.
    """
    b = (1, 2)
    x_types = [NEVER, COMPLIER, ALWAYS] + ([DEFIER] if defiers else [])
    if exclusion:
        y_types = list(itertools.product(b, repeat=2))  # indexed by x
    else:
        y_types = list(itertools.product(b, repeat=4))  # indexed by (x, z)
    hidden = list(itertools.product(range(len(x_types)), range(len(y_types))))
    k = rng.randint(2, min(len(hidden), 10))
    chosen = rng.sample(hidden, k)
    if defiers and not any(x_types[i] == DEFIER for i, _ in chosen):
        chosen[0] = (len(x_types) - 1, chosen[0][1])
    if not any(x_types[i] == COMPLIER for i, _ in chosen):
        chosen[-1] = (1, chosen[-1][1])
    chosen = sorted(set(chosen))
    if not exclusion:
        # one complier whose outcome reads Z directly
        chosen.append((1, y_types.index((1, 2, 2, 1))))
        chosen = sorted(set(chosen))
    exo = product_exo(list(zip(b, random_pmf(rng, 2, max_denominator))),
                      list(zip(chosen, random_pmf(rng, len(chosen), max_denominator))))

    def f_z(pv, u):
        return u[0]

    def f_x(pv, u):
        return x_types[u[1][0]][pv[0] - 1]

    def f_y(pv, u):
        t = y_types[u[1][1]]
        if exclusion:
            return t[pv[0] - 1]
        x, z = pv
        return t[(x - 1) * 2 + (z - 1)]

    ranges = {v: b for v in "ZXY"}
    parents = {"Z": (), "X": ("Z",), "Y": ("X",) if exclusion else ("X", "Z")}
    scm = Scm.from_functions(("Z", "X", "Y"), ranges, parents, exo,
                             {"Z": f_z, "X": f_x, "Y": f_y})
    return LateModel(scm, defiers, exclusion)


# ---------------------------------------------------------------------------
# causation without correlation


def cwc_models() -> tuple:
    """The two models over V1, V2 with U1, U2 fair independent bits.

    In the first V1 = U1 and V2 = U2. In the second V1 = [U1 = U2] and
    V2 = U1 + [V1 = 1, U1 = 0, U2 = 1]. Textbook value v is stored as v + 1.
    """
    half = Fraction(1, 2)
    exo = product_exo([(0, half), (1, half)], [(0, half), (1, half)])
    ranges = {"V1": (1, 2), "V2": (1, 2)}

    m = Scm.from_functions(("V1", "V2"), ranges, {"V1": (), "V2": ()}, exo,
                           {"V1": lambda pv, u: u[0] + 1, "V2": lambda pv, u: u[1] + 1})

    def f_v1(pv, u):
        return int(u[0] == u[1]) + 1

    def f_v2(pv, u):
        v1 = pv[0] - 1
        return u[0] + int(v1 == 1 and u[0] == 0 and u[1] == 1) + 1

    m2 = Scm.from_functions(("V1", "V2"), ranges, {"V1": (), "V2": ("V1",)}, exo,
                            {"V1": f_v1, "V2": f_v2})
    return m, m2


CWC_FORMULA = "P([V1=c2] V2=c2) == P([V1=c2] V2=c1)"


def cwc_formula():
    return parse_formula(CWC_FORMULA)


def chain_model(weights=None) -> Scm:
    """X -> Y with f_X(u) = u and f_Y(x, u) = x over u in {1, 2}."""
    weights = weights or (Fraction(1, 2), Fraction(1, 2))
    exo = tuple(zip((1, 2), weights))
    return Scm.from_functions(("X", "Y"), {"X": (1, 2), "Y": (1, 2)},
                              {"X": (), "Y": ("X",)}, exo,
                              {"X": lambda pv, u: u, "Y": lambda pv, u: pv[0]},
                              identity_constants({"X": (1, 2), "Y": (1, 2)}))
