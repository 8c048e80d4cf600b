"""Elliptic fibrations of the four two-parameter K3 families.

Each family comes with a quartic-in-the-base model ``y^2 = 4x^3 + c2 x^2 + c1 x + c0``
whose coefficients are polynomials in the base coordinate and in (lam, mu).
From it we get the Kodaira normal form ``y^2 = 4x^3 - g2 x - g3``, the chart at
infinity, the discriminant, the j-invariant and the singular fibre types read
off from vanishing orders at irreducible factors over Q.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable

from sympy.polys.rings import PolyElement

from .exactcore import (
    as_poly,
    irreducible_factors,
    parse,
    poly_ring,
    rf_field,
    substitute,
    to_field,
    to_fraction,
)

FAMILIES = (0, 1, 2, 3)
FLIP_NAMES = {"z": "z1", "x1": "x2", "y": "y1"}
_UNFLIP = {v: k for k, v in FLIP_NAMES.items()}


def flipped_name(base: str) -> str:
    return FLIP_NAMES.get(base) or _UNFLIP.get(base) or base + "_inf"


def base_ring(base: str):
    return poly_ring((base, "lam", "mu"))


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True)
class QuarticModel:
    """``y^2 = 4x^3 + c2 x^2 + c1 x + c0`` over the base coordinate ``base``."""

    base: str
    c2: PolyElement
    c1: PolyElement
    c0: PolyElement

    @classmethod
    def from_text(cls, base: str, c2: str, c1: str, c0: str, lead: int = 4) -> "QuarticModel":
        """Build from formulas; a model with leading ``lead*x^3`` is rescaled so
        the cubic term reads ``4x^3``."""
        names = (base, "lam", "mu")
        scale = base_ring(base).domain.convert(Fraction(4, lead))
        return cls(base, *(_poly(t, names) * scale for t in (c2, c1, c0)))


@dataclass(frozen=True)
class FamilyData:
    base: str
    c2: str
    c1: str
    c0: str
    lead: int  # coefficient of x^3 in the printed model
    fibres: str  # expected singular fibres, e.g. "I3 + I15 + 6I1"
    # birational map from the affine surface: printed relation and coordinates
    relation: str
    fibre_vars: tuple[str, str]  # (cubic coordinate, square coordinate)
    affine_map: dict


# The family-2 map prints "x1 y + x1 y"; substitution forces the second to be x1 y^2.
# The I10 + I*2 map prints "x1 z2" for x1 z1.
FAMILY_DATA: dict[object, FamilyData] = {
    0: FamilyData(
        "z",
        "lam^2 + 2*lam*z + z^2 + 2*lam*z^2 + 2*z^3 + z^4",
        "-2*lam*mu*z - 2*mu*z^2 - 2*mu*z^3",
        "mu^2*z^2",
        4,
        "I3 + I15 + 6I1",
        "y1^2 - (4*x0^3 + (lam^2 + 2*lam*z + z^2 + 2*lam*z^2 + 2*z^3 + z^4)*x0^2"
        " + (-2*lam*mu*z - 2*mu*z^2 - 2*mu*z^3)*x0 + mu^2*z^2)",
        ("x0", "y1"),
        {"x": "-mu/x0", "y": "(-lam*x0 - y1 + mu*z - x0*z - x0*z^2)/(2*x0*z)", "z": "z"},
    ),
    1: FamilyData(
        "x1",
        "mu^2 + 2*mu*x1 + x1^2 - 4*x1^3",
        "-8*lam*mu*x1^3 - 8*lam*x1^4",
        "16*lam^2*x1^6",
        1,
        "I9 + I3* + 6I1",
        "z1^2 - (y1^3 + (mu^2 + 2*mu*x1 + x1^2 - 4*x1^3)*y1^2"
        " + (-8*lam*mu*x1^3 - 8*lam*x1^4)*y1 + 16*lam^2*x1^6)",
        ("y1", "z1"),
        {
            "x": "-2*x1^2*y1/(-4*lam*x1^3 + mu*y1 + x1*y1 + z1)",
            "y": "y1^2/(2*x1*(-4*lam*x1^3 + mu*y1 + x1*y1 + z1))",
            "z": "-(-4*lam*x1^3 + mu*y1 + x1*y1 + z1)/(2*x1*y1)",
        },
    ),
    2: FamilyData(
        "y",
        "-4*lam*y + y^2 + 2*y^3 + y^4",
        "-8*mu*y^3 - 8*mu*y^4",
        "16*mu^2*y^4",
        1,
        "I1* + I11 + 6I1",
        "z1^2 - (x1^3 + (-4*lam*y + y^2 + 2*y^3 + y^4)*x1^2 + (-8*mu*y^3 - 8*mu*y^4)*x1 + 16*mu^2*y^4)",
        ("x1", "z1"),
        {
            "x": "x1^2/(2*y*(x1*y - 4*mu*y^2 + x1*y^2 + z1))",
            "y": "y",
            "z": "-(x1*y - 4*mu*y^2 + x1*y^2 + z1)/(2*x1*y)",
        },
    ),
    3: FamilyData(
        "z",
        "mu^2 + 2*mu*z + z^2 + 2*mu*z^2 + 2*z^3 + z^4",
        "-8*lam*mu*z^3 - 8*lam*z^4 - 8*lam*z^5",
        "16*lam^2*z^6",
        1,
        "I9 + I9 + 6I1",
        "y1^2 - (x1^3 + (mu^2 + 2*mu*z + z^2 + 2*mu*z^2 + 2*z^3 + z^4)*x1^2"
        " + (-8*lam*mu*z^3 - 8*lam*z^4 - 8*lam*z^5)*x1 + 16*lam^2*z^6)",
        ("x1", "y1"),
        {"x": "-4*lam*z^2/x1", "y": "(-mu*x1 - y1 - x1*z - x1*z^2 + 4*lam*z^3)/(2*x1*z)", "z": "z"},
    ),
    "3p": FamilyData(
        "x1",
        "lam^2 + 2*lam*x1 + x1^2 - 4*mu*x1^2 - 4*x1^3",
        "16*mu*x1^5",
        "0",
        1,
        "I10 + I2* + 6I1",
        "y1^2 - (z1^3 + (lam^2 + 2*lam*x1 + x1^2 - 4*mu*x1^2 - 4*x1^3)*z1^2 + 16*mu*x1^5*z1)",
        ("z1", "y1"),
        {
            "x": "2*x1^2*(4*mu*x1^2 - z1)/(y1 + lam*z1 + x1*z1)",
            "y": "(y1 + lam*z1 + x1*z1)/(2*x1*(4*mu*x1^2 - z1))",
            "z": "-z1*(4*mu*x1^2 - z1)/(2*x1*(y1 + lam*z1 + x1*z1))",
        },
    ),
}

AFFINE_EQUATIONS = {
    0: "x*y*z^2*(x + y + z + 1) + lam*x*y*z + mu",
    1: "x*y*z*(x + y + z + 1) + lam*x + mu*y",
    2: "x*y*z*(x + y + z + 1) + lam*x + mu",
    3: "x*y*z*(x + y + z + 1) + lam*z + mu*x*y",
}

VARIANTS = {"default", "alternate"}


def _key(j, variant: str = "default"):
    if j not in FAMILIES:
        raise KeyError(f"unknown family {j!r}")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "alternate":
        if j != 3:
            raise ValueError("only family 3 has an alternate fibration")
        return "3p"
    return j


def _poly(text: str, names: tuple[str, ...]) -> PolyElement:
    R = poly_ring(names)
    f = parse(text, names)
    p = as_poly(f)
    return R(dict(p.terms())) if p.ring != R else p


def _flip_poly(p: PolyElement, weight: int) -> PolyElement:
    """``t^weight * p(1/t)`` in the ring with the base renamed."""
    base = str(p.ring.symbols[0])
    R = base_ring(flipped_name(base))
    terms = {}
    for (e, a, b), c in p.terms():
        if e > weight:
            raise ValueError(f"degree {e} in {base} exceeds weight {weight}")
        terms[(weight - e, a, b)] = c
    return R(terms)


def family_model(j, chart: str = "finite", variant: str = "default") -> QuarticModel:
    """Quartic model of family ``j``; for j=3 the I9+I9 fibration is the
    default and ``variant="alternate"`` selects the I10+I*2 one."""
    d = FAMILY_DATA[_key(j, variant)]
    names = (d.base, "lam", "mu")
    scale = base_ring(d.base).domain.convert(Fraction(4, d.lead))
    c2, c1, c0 = (_poly(t, names) * scale for t in (d.c2, d.c1, d.c0))
    if chart == "finite":
        return QuarticModel(d.base, c2, c1, c0)
    if chart == "infinite":
        return QuarticModel(flipped_name(d.base), _flip_poly(c2, 4), _flip_poly(c1, 8), _flip_poly(c0, 12))
    raise ValueError(f"unknown chart {chart!r}")


@dataclass(frozen=True)
class WeierstrassModel:
    """``y^2 = 4x^3 - g2 x - g3`` with g2, g3 in Q[base, lam, mu]."""

    base: str
    g2: PolyElement
    g3: PolyElement

    def __post_init__(self):
        if self.g2.ring != self.g3.ring or str(self.g2.ring.symbols[0]) != self.base:
            raise ValueError("g2 and g3 must share the ring (base, lam, mu)")

    @classmethod
    def from_text(cls, base: str, g2: str, g3: str) -> "WeierstrassModel":
        names = (base, "lam", "mu")
        return cls(base, _poly(g2, names), _poly(g3, names))

    def degrees(self) -> tuple[int, int]:
        return self.g2.degree(0), self.g3.degree(0)


def to_weierstrass(Q: QuarticModel) -> WeierstrassModel:
    """Shift x by -c2/12 to kill the quadratic term."""
    c2, c1, c0 = Q.c2, Q.c1, Q.c0
    g2 = c2**2 / 12 - c1
    g3 = c1 * c2 / 12 - c2**3 / 216 - c0
    W = WeierstrassModel(Q.base, g2, g3)
    d2, d3 = W.degrees()
    if d2 > 8 or d3 > 12:
        raise ValueError(f"degrees ({d2}, {d3}) exceed the K3 bounds (8, 12)")
    return W


def chart_flip(W: WeierstrassModel) -> WeierstrassModel:
    """Pass to the chart t1 = 1/t: h2 = t1^8 g2(1/t1), h3 = t1^12 g3(1/t1)."""
    return WeierstrassModel(flipped_name(W.base), _flip_poly(W.g2, 8), _flip_poly(W.g3, 12))


def discriminant(W: WeierstrassModel) -> PolyElement:
    return W.g2**3 - 27 * W.g3**2


def j_invariant(W: WeierstrassModel):
    """``g2^3 / (g2^3 - 27 g3^2)`` as a rational function."""
    D = discriminant(W)
    if D == 0:
        raise ValueError("identically singular model")
    K = rf_field((W.base, "lam", "mu"))
    return to_field(W.g2**3, K) / to_field(D, K)


def weierstrass(j, chart: str = "finite", variant: str = "default") -> WeierstrassModel:
    W = to_weierstrass(family_model(j, "finite", variant))
    return chart_flip(W) if chart == "infinite" else W


# ---------------------------------------------------------------------------
# printed normal forms and discriminants, kept for comparison


@lru_cache(maxsize=None)
def _printed() -> dict:
    text = resources.files("k3lab").joinpath("data/printed_weierstrass.json").read_text()
    return json.loads(text)


def printed_forms(j, variant: str = "default") -> dict[str, PolyElement]:
    """The printed g2, g3, h2, h3, D0, Dinf as polynomials (typos included)."""
    key = str(_key(j, variant))
    base = FAMILY_DATA[_key(j, variant)].base
    out = {}
    for name, text in _printed()[key].items():
        b = base if name in ("g2", "g3", "D0") else flipped_name(base)
        out[name] = _poly(text, (b, "lam", "mu"))
    return out


def _constant_ratio(a: PolyElement, b: PolyElement):
    """Rational c with a = c*b, or None."""
    if b == 0:
        return Fraction(0) if a == 0 else None
    lm = b.LM
    ca = dict(a.terms()).get(lm)
    cb = dict(b.terms()).get(lm)
    if ca is None:
        return None
    c = ca / cb
    return to_fraction(c) if a == b * c else None


def compare_printed(j, variant: str = "default") -> list[dict]:
    """Compare derived g2, g3, h2, h3 exactly and the discriminants up to a
    nonzero constant against the printed formulas."""
    W = weierstrass(j, "finite", variant)
    Wi = chart_flip(W)
    derived = {"g2": W.g2, "g3": W.g3, "h2": Wi.g2, "h3": Wi.g3, "D0": discriminant(W), "Dinf": discriminant(Wi)}
    report = []
    for name, printed in printed_forms(j, variant).items():
        d = derived[name]
        if name.startswith("D"):
            c = _constant_ratio(d, printed)
            ok = c is not None and c != 0
            report.append({"item": name, "rule": "up to constant", "match": ok, "constant": None if c is None else str(c)})
        else:
            diff = d - printed
            report.append({"item": name, "rule": "exact", "match": diff == 0, "difference": str(diff.as_expr()) if diff else "0"})
    return report


# ---------------------------------------------------------------------------
# Kodaira classification


EULER = {"II": 2, "III": 3, "IV": 4, "IV*": 8, "III*": 9, "II*": 10}
COMPONENTS = {"II": 1, "III": 2, "IV": 3, "IV*": 7, "III*": 8, "II*": 9}


@dataclass(frozen=True, order=True)
class FibreType:
    kind: str  # "I", "I*", "II", "III", "IV", "IV*", "III*", "II*"
    param: int = 0

    def __post_init__(self):
        if self.kind not in ("I", "I*") and self.kind not in EULER:
            raise ValueError(f"unknown fibre kind {self.kind!r}")
        if self.param < 0:
            raise ValueError("negative fibre parameter")

    @property
    def euler(self) -> int:
        if self.kind == "I":
            return self.param
        if self.kind == "I*":
            return self.param + 6
        return EULER[self.kind]

    @property
    def components(self) -> int:
        if self.kind == "I":
            return max(self.param, 1)
        if self.kind == "I*":
            return self.param + 5
        return COMPONENTS[self.kind]

    def __str__(self) -> str:
        if self.kind == "I":
            return f"I{self.param}"
        if self.kind == "I*":
            return f"I{self.param}*"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "FibreType":
        t = text.strip().replace("_", "").replace("^", "").replace("{", "").replace("}", "")
        if t in EULER:
            return cls(t)
        if t.startswith("I") and t.endswith("*"):
            return cls("I*", int(t[1:-1]))
        if t.startswith("I"):
            return cls("I", int(t[1:]))
        raise ValueError(f"cannot parse fibre type {text!r}")


def kodaira_type(v2: int, v3: int, vd: int) -> FibreType:
    """Kodaira type from the vanishing orders of (g2, g3, Delta) of a minimal model.

    ``v2``/``v3`` may be large (or a big sentinel) when g2/g3 vanish identically.
    """
    if vd <= 0:
        raise ValueError("not a singular fibre")
    if v2 == 0 or v3 == 0:
        if v2 == 0 and v3 == 0:
            return FibreType("I", vd)
        raise ValueError(f"inconsistent orders {(v2, v3, vd)}")
    if vd == 2 and v2 >= 1 and v3 == 1:
        return FibreType("II")
    if vd == 3 and v2 == 1 and v3 >= 2:
        return FibreType("III")
    if vd == 4 and v2 >= 2 and v3 == 2:
        return FibreType("IV")
    if v2 >= 2 and v3 >= 3 and vd == 6:
        return FibreType("I*", 0)
    if v2 == 2 and v3 == 3 and vd > 6:
        return FibreType("I*", vd - 6)
    if vd == 8 and v2 >= 3 and v3 == 4:
        return FibreType("IV*")
    if vd == 9 and v2 == 3 and v3 >= 5:
        return FibreType("III*")
    if vd == 10 and v2 >= 4 and v3 == 5:
        return FibreType("II*")
    raise ValueError(f"orders {(v2, v3, vd)} do not match a minimal Kodaira fibre")


_INF = 10**6


def _valuation(p: PolyElement, f: PolyElement) -> int:
    if p == 0:
        return _INF
    v = 0
    while True:
        q, r = p.div(f)
        if r != 0:
            return v
        p, v = q, v + 1


def specialize(p: PolyElement, lam0, mu0) -> PolyElement:
    """Evaluate (lam, mu) at rationals; result lives in Q[base]."""
    R = p.ring
    S = poly_ring((str(R.symbols[0]),))
    conv = R.domain.convert
    q = p.evaluate([(R.gens[1], conv(Fraction(lam0))), (R.gens[2], conv(Fraction(mu0)))])
    if not isinstance(q, PolyElement):
        return S(q)
    return q if q.ring == S else S(dict(q.terms()))


def _location_factor(location, S) -> PolyElement:
    if isinstance(location, PolyElement):
        return S(dict(location.terms())) if location.ring != S else location
    return S.gens[0] - S.domain.convert(Fraction(location))


def classify_fibre(W: WeierstrassModel, location, lam0, mu0) -> FibreType:
    """Kodaira type of the fibre over ``location`` after specializing (lam, mu).

    ``location`` is ``"infinity"``, a rational root, or an irreducible
    polynomial in the base variable.
    """
    if isinstance(location, str) and location.strip().lower() in ("infinity", "inf", "oo"):
        return classify_fibre(chart_flip(W), 0, lam0, mu0)
    g2 = specialize(W.g2, lam0, mu0)
    g3 = specialize(W.g3, lam0, mu0)
    f = _location_factor(location, g2.ring)
    if f.degree() < 1:
        raise ValueError("location must be a nonconstant factor")
    v2, v3 = _valuation(g2, f), _valuation(g3, f)
    while v2 >= 4 and v3 >= 6:
        g2 = g2.quo(f**4) if g2 else g2
        g3 = g3.quo(f**6) if g3 else g3
        v2, v3 = _valuation(g2, f), _valuation(g3, f)
    D = g2**3 - 27 * g3**2
    if D == 0:
        raise ValueError("specialized model is singular everywhere")
    vd = _valuation(D, f)
    if vd == 0:
        raise ValueError("location is not a root of the discriminant")
    return kodaira_type(v2, v3, vd)


@dataclass(frozen=True)
class FibreEntry:
    location: str
    fibre: FibreType
    count: int  # number of conjugate points (degree of the factor)


@dataclass(frozen=True)
class FibreTable:
    entries: tuple[FibreEntry, ...]

    @property
    def euler_sum(self) -> int:
        return sum(e.fibre.euler * e.count for e in self.entries)

    def multiset(self) -> Counter:
        c: Counter = Counter()
        for e in self.entries:
            c[str(e.fibre)] += e.count
        return c

    def summary(self) -> str:
        c = self.multiset()
        order = sorted(c, key=lambda k: (k == "I1", -FibreType.parse(k).euler, k))
        return " + ".join((f"{c[k]}{k}" if c[k] > 1 else k) for k in order)

    def to_json(self) -> dict:
        return {
            "entries": [
                {"location": e.location, "type": str(e.fibre), "count": e.count, "euler": e.fibre.euler}
                for e in self.entries
            ],
            "summary": self.summary(),
            "euler_sum": self.euler_sum,
        }


def parse_fibre_list(text: str) -> Counter:
    """``"I3 + I15 + 6I1"`` -> multiset of fibre names."""
    c: Counter = Counter()
    for part in text.split("+"):
        part = part.strip().replace(" ", "")
        n = ""
        while part and part[0].isdigit():
            n, part = n + part[0], part[1:]
        c[str(FibreType.parse(part))] += int(n or 1)
    return c


def expected_fibres(j, variant: str = "default") -> Counter:
    return parse_fibre_list(FAMILY_DATA[_key(j, variant)].fibres)


def _describe(f: PolyElement) -> str:
    base = str(f.ring.symbols[0])
    if f.degree() == 1:
        root = -to_fraction(dict(f.terms()).get((0,), 0)) / to_fraction(f.LC)
        return f"{base}={root}"
    return f"{f.as_expr()}=0".replace("**", "^")


def fibre_table(j, lam0, mu0, variant: str = "default") -> FibreTable:
    lam0, mu0 = Fraction(lam0), Fraction(mu0)
    if not in_lambda(j, lam0, mu0):
        raise ValueError(f"({lam0}, {mu0}) lies on the singular locus of family {j}")
    W = weierstrass(j, "finite", variant)
    entries = []
    D = specialize(discriminant(W), lam0, mu0)
    for f, _ in irreducible_factors(D):
        if f.degree() < 1:
            continue
        f = f.monic()
        entries.append(FibreEntry(_describe(f), classify_fibre(W, f, lam0, mu0), f.degree()))
    Wi = chart_flip(W)
    Di = specialize(discriminant(Wi), lam0, mu0)
    t1 = Di.ring.gens[0]
    if Di.rem(t1) == 0:
        entries.append(FibreEntry("infinity", classify_fibre(W, "infinity", lam0, mu0), 1))
    return FibreTable(tuple(entries))


# ---------------------------------------------------------------------------
# parameter loci


SINGULAR_FACTORS = {
    0: "lam^2*(4*lam - 1)^3 - 2*(2 + 25*lam*(20*lam - 1))*mu - 3125*mu^2",
    1: "729*lam^2 - 54*lam*(27*mu - 1) + (1 + 27*mu)^2",
    2: "lam^2*(1 + 27*lam)^2 - 2*lam*mu*(1 + 189*lam) + (1 + 576*lam)*mu^2 - 256*mu^3",
    3: "729*lam^2 - (4*mu - 1)^3 + 54*lam*(1 + 12*mu)",
}


def singular_locus(j) -> list[PolyElement]:
    """Factors whose vanishing removes (lam, mu) from the generic locus."""
    if j not in SINGULAR_FACTORS:
        raise KeyError(f"unknown family {j!r}")
    R = poly_ring(("lam", "mu"))
    lam, mu = R.gens
    return [lam, mu, _poly(SINGULAR_FACTORS[j], ("lam", "mu"))]


def in_lambda(j, lam0, mu0) -> bool:
    pt = (Fraction(lam0), Fraction(mu0))
    for f in singular_locus(j):
        R = f.ring
        if f(*(R.domain.convert(c) for c in pt)) == 0:
            return False
    return True


@lru_cache(maxsize=None)
def _degeneracy_locus(key) -> tuple[PolyElement, ...]:
    import sympy

    j, variant = (3, "alternate") if key == "3p" else (key, "default")
    W = weierstrass(j, "finite", variant)
    D = discriminant(W)
    R = poly_ring(("lam", "mu"))
    base = sympy.Symbol(W.base)
    known = {str(f.monic()) for f in singular_locus(j)}
    out = {}
    for f, e in irreducible_factors(D):
        if f.degree(0) < 1 or e != 1:
            continue
        p = sympy.Poly(f.as_expr(), base)
        for c in (p.coeffs()[-1], p.LC(), sympy.discriminant(p.as_expr(), base)):
            for g, _ in sympy.factor_list(c)[1]:
                if g.free_symbols:
                    h = _poly(str(g), ("lam", "mu")).monic()
                    if str(h) not in known:
                        out[str(h)] = h
    return tuple(R(dict(h.terms())) for _, h in sorted(out.items()))


def degeneracy_locus(j, variant: str = "default") -> list[PolyElement]:
    """Curves inside the parameter domain where the fibre list differs from
    the generic one: an I1 fibre meets a distinguished fibre or two I1 fibres
    collide.  Read off from the constant term, leading coefficient and
    discriminant of the I1 cofactor of the discriminant."""
    return list(_degeneracy_locus(_key(j, variant)))


def is_generic(j, lam0, mu0, variant: str = "default") -> bool:
    if not in_lambda(j, lam0, mu0):
        return False
    pt = [Fraction(lam0), Fraction(mu0)]
    return all(f(*(f.ring.domain.convert(c) for c in pt)) != 0 for f in degeneracy_locus(j, variant))


def random_lambda_point(j, rng: random.Random, height: int = 9, generic: bool = True,
                        variant: str = "default") -> tuple[Fraction, Fraction]:
    """Random rational point of small height in the parameter domain, by
    default also off the degeneracy locus."""
    while True:
        lam0 = Fraction(rng.randint(-height, height), rng.randint(1, height))
        mu0 = Fraction(rng.randint(-height, height), rng.randint(1, height))
        if is_generic(j, lam0, mu0, variant) if generic else in_lambda(j, lam0, mu0):
            return lam0, mu0


def lambda0_curve_parametrization():
    """Rational parametrization a -> (lam(a), mu(a)) of the family-0 cubic factor."""
    K = rf_field(("a",))
    a = K.gens[0]
    return (a - 1) * (a + 1) / 5, (2 * a - 3) ** 3 * (a + 1) ** 2 / 3125


# ---------------------------------------------------------------------------
# birational maps from the affine surfaces


def verify_birational_map(j, variant: str = "default") -> bool:
    """Substituting the map into the affine equation gives a rational
    function whose numerator lies in the ideal of the model relation."""
    d = FAMILY_DATA[_key(j, variant)]
    ycoord, xcoord = d.fibre_vars[1], d.fibre_vars[0]
    names = (ycoord, xcoord, d.base, "lam", "mu")
    K = rf_field(names)
    images = {v: parse(e, names) for v, e in d.affine_map.items()}
    F = parse(AFFINE_EQUATIONS[j], ("x", "y", "z", "lam", "mu"))
    G = substitute(F, images, K)
    rel = as_poly(parse(d.relation, names))
    num = G.numer
    rel = num.ring(dict(rel.terms()))
    return num.rem(rel) == 0


def euler_sum(entries: Iterable[FibreType]) -> int:
    return sum(f.euler for f in entries)
