"""Period series, theta-operator algebra and GKZ reduction.

Operators are normal-ordered sums ``c * lam^i mu^j thl^a thm^b`` with every
multiplication operator to the left of every Euler derivation
(``thl = lam d/dlam``, ``thm = mu d/dmu``).
"""

from __future__ import annotations

import ast
import io
import tokenize
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Mapping, Sequence

from sympy.polys.rings import PolyElement

from .exactcore import BiSeries, nullspace, poly_ring, solve_linear, to_fraction
from .polytopes import GkzData, gkz_matrix, integer_kernel, mori_generators, polytope

Key = tuple[int, int, int, int]
LM_RING = poly_ring(("lam", "mu"))


@dataclass(frozen=True)
class ThetaOperator:
    terms: Mapping[Key, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, c in self.terms.items():
            if any(e < 0 for e in k):
                raise ValueError(f"negative exponent in operator term {k}")
            c = Fraction(c)
            if c:
                clean[tuple(k)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    # constructors
    @classmethod
    def const(cls, c) -> "ThetaOperator":
        return cls({(0, 0, 0, 0): Fraction(c)})

    @classmethod
    def lam(cls) -> "ThetaOperator":
        return cls({(1, 0, 0, 0): Fraction(1)})

    @classmethod
    def mu(cls) -> "ThetaOperator":
        return cls({(0, 1, 0, 0): Fraction(1)})

    @classmethod
    def theta_lambda(cls) -> "ThetaOperator":
        return cls({(0, 0, 1, 0): Fraction(1)})

    @classmethod
    def theta_mu(cls) -> "ThetaOperator":
        return cls({(0, 0, 0, 1): Fraction(1)})

    @classmethod
    def parse(cls, text: str) -> "ThetaOperator":
        return parse_operator(text)

    # arithmetic
    @staticmethod
    def _lift(x) -> "ThetaOperator":
        if isinstance(x, ThetaOperator):
            return x
        if isinstance(x, (int, Fraction)):
            return ThetaOperator.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return ThetaOperator(out)

    __radd__ = __add__

    def __neg__(self):
        return ThetaOperator({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "ThetaOperator":
        c = Fraction(c)
        return ThetaOperator({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, ThetaOperator):
            return NotImplemented
        return compose(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("operator powers must be nonnegative integers")
        out = ThetaOperator.const(1)
        for _ in range(e):
            out = out * self
        return out

    # inspection
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def max_shift(self) -> int:
        return max((i + j for i, j, _, _ in self.terms), default=0)

    @property
    def theta_order(self) -> int:
        return max((a + b for _, _, a, b in self.terms), default=0)

    def coefficient_polys(self) -> dict[tuple[int, int], PolyElement]:
        """Polynomial coefficient of each monomial thl^a thm^b."""
        out: dict[tuple[int, int], PolyElement] = {}
        for (i, j, a, b), c in self.terms.items():
            term = LM_RING({(i, j): LM_RING.domain.convert(c)})
            out[(a, b)] = out.get((a, b), LM_RING.zero) + term
        return out

    @classmethod
    def from_coefficient_polys(cls, coeffs: Mapping[tuple[int, int], PolyElement]) -> "ThetaOperator":
        terms = {}
        for (a, b), p in coeffs.items():
            for (i, j), c in p.terms():
                terms[(i, j, a, b)] = to_fraction(c)
        return cls(terms)

    def apply(self, s: BiSeries) -> BiSeries:
        return apply(self, s)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (i, j, a, b), c in self.terms.items():
            factors = [f"{n}^{e}" if e > 1 else n
                       for n, e in (("lam", i), ("mu", j), ("thl", a), ("thm", b)) if e]
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def compose(A: ThetaOperator, B: ThetaOperator) -> ThetaOperator:
    """Normal-ordered product, using thl^a lam^k = lam^k (thl + k)^a."""
    out: dict[Key, Fraction] = {}
    for (i, j, a, b), c1 in A.terms.items():
        for (k, l, p, q), c2 in B.terms.items():
            for s in range(a + 1):
                ca = comb(a, s) * k ** (a - s)
                if ca == 0:
                    continue
                for t in range(b + 1):
                    cb = comb(b, t) * l ** (b - t)
                    if cb == 0:
                        continue
                    key = (i + k, j + l, s + p, t + q)
                    out[key] = out.get(key, 0) + c1 * c2 * ca * cb
    return ThetaOperator(out)


def apply(op: ThetaOperator, s: BiSeries) -> BiSeries:
    """Apply to a truncated series; validity drops by the largest shift."""
    order = s.order - op.max_shift
    out: dict[tuple[int, int], Fraction] = {}
    for (n, m), v in s.coeffs.items():
        for (i, j, a, b), c in op.terms.items():
            if n + m + i + j > order:
                continue
            key = (n + i, m + j)
            out[key] = out.get(key, 0) + c * (n**a) * (m**b) * v
    return BiSeries(max(order, -1), out)


def annihilates(op: ThetaOperator, s: BiSeries) -> bool:
    """True iff ``op s`` vanishes through its valid order (which must be >= 0)."""
    r = apply(op, s)
    return r.order >= 0 and r.is_zero()


# ---------------------------------------------------------------------------
# parsing


_NAMES = {
    "lam": ThetaOperator.lam,
    "mu": ThetaOperator.mu,
    "thl": ThetaOperator.theta_lambda,
    "thm": ThetaOperator.theta_mu,
}
_SPELLINGS = [("θλμ", "thl*thm"), ("θλ", "thl"), ("θμ", "thm"), ("λ", "lam"), ("μ", "mu"), ("−", "-"), ("^", "**")]


def _insert_products(src: str) -> str:
    """Make juxtaposition explicit: ``2thl(thl+1)`` -> ``2*thl*(thl+1)``."""
    out, prev = [], None
    toks = tokenize.generate_tokens(io.StringIO(src).readline)
    for tok in toks:
        if tok.type in (tokenize.NEWLINE, tokenize.NL, tokenize.ENDMARKER):
            continue
        starts = tok.type in (tokenize.NAME, tokenize.NUMBER) or tok.string == "("
        if prev is not None and starts and (prev.type in (tokenize.NAME, tokenize.NUMBER) or prev.string == ")"):
            out.append("*")
        out.append(tok.string)
        prev = tok
    return " ".join(out)


def parse_operator(text: str) -> ThetaOperator:
    """Parse e.g. ``"thl*(thl+2*thm) - lam*(2*thl+5*thm+1)*(2*thl+5*thm+2)"``.

    Products are read left to right as operator composition, and may be
    written by juxtaposition.  Division is allowed by numbers only.
    """
    src = text
    for a, b in _SPELLINGS:
        src = src.replace(a, b)
    try:
        src = _insert_products(src)
    except (tokenize.TokenError, IndentationError) as e:
        raise ValueError(f"cannot parse operator {text!r}: {e}") from None
    tree = ast.parse(src, mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in _NAMES:
                raise ValueError(f"unknown symbol {node.id!r} in operator")
            return _NAMES[node.id]()
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            lhs, rhs = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return lhs + rhs
            if isinstance(node.op, ast.Sub):
                return lhs - rhs
            if isinstance(node.op, ast.Mult):
                if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
                    return lhs * rhs
                return ThetaOperator._lift(lhs) * ThetaOperator._lift(rhs)
            if isinstance(node.op, ast.Div):
                if not isinstance(rhs, Fraction) or rhs == 0:
                    raise ValueError("division only by nonzero numbers")
                return lhs / rhs if isinstance(lhs, Fraction) else lhs.scale(1 / rhs)
            if isinstance(node.op, ast.Pow):
                if not isinstance(rhs, Fraction) or rhs.denominator != 1:
                    raise ValueError("exponents must be integers")
                return lhs ** int(rhs)
        raise ValueError(f"unsupported syntax in operator: {ast.dump(node)}")

    v = ev(tree)
    return ThetaOperator._lift(v)


# ---------------------------------------------------------------------------
# period series


@dataclass(frozen=True)
class CoeffRule:
    family: int
    text: str
    rule: Callable[[int, int], Fraction]

    def __call__(self, n: int, m: int) -> Fraction:
        return self.rule(n, m)


def _f(k: int) -> int:
    return factorial(k)


COEFF_RULES = {
    0: CoeffRule(0, "(-1)^m (5m+2n)!/(n! (m!)^3 (2m+n)!)",
                 lambda n, m: Fraction((-1) ** m * _f(5 * m + 2 * n), _f(n) * _f(m) ** 3 * _f(2 * m + n))),
    1: CoeffRule(1, "(-1)^(m+n) (3n+3m)!/((n!)^2 (m!)^2 (n+m)!)",
                 lambda n, m: Fraction((-1) ** (m + n) * _f(3 * n + 3 * m), _f(n) ** 2 * _f(m) ** 2 * _f(n + m))),
    2: CoeffRule(2, "(-1)^n (4m+3n)!/((m!)^2 n! ((m+n)!)^2)",
                 lambda n, m: Fraction((-1) ** n * _f(4 * m + 3 * n), _f(m) ** 2 * _f(n) * _f(m + n) ** 2)),
    3: CoeffRule(3, "(-1)^n (3n+2m)!/((n!)^3 (m!)^2)",
                 lambda n, m: Fraction((-1) ** n * _f(3 * n + 2 * m), _f(n) ** 3 * _f(m) ** 2)),
}


def period_series(j: int, N: int) -> BiSeries:
    """Period of family ``j`` with the (2 pi i)^2 prefactor dropped."""
    if j not in COEFF_RULES:
        raise KeyError(f"unknown family {j!r}")
    if N < 0:
        raise ValueError("order must be nonnegative")
    return BiSeries.from_rule(COEFF_RULES[j], N)


def _poch(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= a + i
    return out


def appell_f4(a, b, c, cp, N: int, x_scale=27, y_scale=27) -> BiSeries:
    """Appell F4(a, b; c, c'; x, y) with x = x_scale*lam, y = y_scale*mu."""
    a, b, c, cp = map(Fraction, (a, b, c, cp))
    for v in (c, cp):
        if v <= 0 and v.denominator == 1:
            raise ValueError("lower parameters must not be nonpositive integers")
    xs, ys = Fraction(x_scale), Fraction(y_scale)

    def rule(n: int, m: int) -> Fraction:
        # n is the lam exponent (x), m the mu exponent (y)
        top = _poch(a, n + m) * _poch(b, n + m)
        return top / (_poch(c, n) * _poch(cp, m) * _f(n) * _f(m)) * xs**n * ys**m

    return BiSeries.from_rule(rule, N)


def gamma_coefficient(ell: Sequence[int], emm: Sequence[int], n: int, m: int) -> Fraction:
    """Coefficient of lam^n mu^m in the torus period for lam = a^ell, mu = a^emm."""
    L = [n * x + m * y for x, y in zip(ell, emm)]
    N = -L[0]
    if N < 0 or any(v < 0 for v in L[1:]):
        return Fraction(0)
    den = 1
    for v in L[1:]:
        den *= _f(v)
    return Fraction((-1) ** N * _f(N), den)


# ---------------------------------------------------------------------------
# GKZ systems


@dataclass(frozen=True)
class GkzSystem:
    A: tuple[tuple[int, ...], ...]
    beta: tuple[int, ...]
    kernel: tuple[tuple[int, ...], ...]

    @property
    def boxes(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """(u+, u-) for each kernel vector: d^{u+} eta = d^{u-} eta."""
        return [(tuple(max(x, 0) for x in u), tuple(max(-x, 0) for x in u)) for u in self.kernel]

    def euler_text(self) -> list[str]:
        out = []
        for row, b in zip(self.A, self.beta):
            lhs = " + ".join(f"{c}*th{i + 1}" for i, c in enumerate(row) if c)
            out.append(f"({lhs}) eta = {b} eta")
        return out


def gkz_from_polytope(g: GkzData) -> GkzSystem:
    K = integer_kernel(g.A)
    if len(K) != 2:
        raise ValueError(f"kernel rank {len(K)} != 2")
    for u in K:
        if any(sum(a * x for a, x in zip(row, u)) for row in g.A):
            raise AssertionError("kernel vector does not annihilate A")
    return GkzSystem(tuple(map(tuple, g.A)), tuple(g.beta), tuple(map(tuple, K)))


def parametrization(j: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exponent vectors (ell, m) with lam = a^ell, mu = a^m.

    The two Mori-cone generators are ordered so that the torus period
    reproduces the family's coefficient rule.  A rule symmetric in (n, m)
    accepts both orders; the lexicographically larger ell is taken then.
    """
    rays = sorted(mori_generators(gkz_matrix(polytope(j))), reverse=True)
    rule = COEFF_RULES[j]
    for ell, emm in (rays, rays[::-1]):
        if all(gamma_coefficient(ell, emm, n, m) == rule(n, m) for n in range(4) for m in range(4)):
            return tuple(ell), tuple(emm)
    raise ValueError(f"no ordering of the cone generators matches family {j}")


AffineTheta = tuple[Fraction, Fraction, Fraction]  # a*thl + b*thm + c


def solve_euler(sys: GkzSystem, ell: Sequence[int], emm: Sequence[int]) -> list[AffineTheta]:
    """Express every theta_i as an affine form in (thl, thm).

    Picks a column where ell is 1 and emm is 0 (theta_i = thl there) and one
    with the roles swapped, then solves the four Euler relations for the rest.
    """
    k = len(ell)
    il = next((i for i in range(1, k) if ell[i] == 1 and emm[i] == 0), None)
    im = next((i for i in range(1, k) if emm[i] == 1 and ell[i] == 0), None)
    if il is None or im is None:
        raise ValueError("parametrization has no coordinate columns")
    rest = [i for i in range(k) if i not in (il, im)]
    A = [[row[i] for i in rest] for row in sys.A]
    cols = []
    for rhs in (
        [-row[il] for row in sys.A],
        [-row[im] for row in sys.A],
        list(sys.beta),
    ):
        sol = solve_linear(A, rhs)
        if not sol.consistent or sol.nullspace:
            raise ValueError("Euler system is singular")
        cols.append(sol.particular)
    out: list[AffineTheta] = [(Fraction(0),) * 3] * k
    out[il] = (Fraction(1), Fraction(0), Fraction(0))
    out[im] = (Fraction(0), Fraction(1), Fraction(0))
    for r, i in enumerate(rest):
        out[i] = (Fraction(cols[0][r]), Fraction(cols[1][r]), Fraction(cols[2][r]))
    return out


def _affine_op(f: AffineTheta) -> ThetaOperator:
    a, b, c = f
    return ThetaOperator({(0, 0, 1, 0): a, (0, 0, 0, 1): b, (0, 0, 0, 0): c})


def _falling(op: ThetaOperator, k: int) -> ThetaOperator:
    out = ThetaOperator.const(1)
    for r in range(k):
        out = out * (op - r)
    return out


def reduce_box(u: Sequence[int], thetas: Sequence[AffineTheta], ell, emm) -> ThetaOperator:
    """Two-variable operator from the box d^{u+} = d^{u-}."""
    sol = solve_linear([[ell[i], emm[i]] for i in range(len(u))], list(u))
    if not sol.consistent:
        raise ValueError("box vector not in the span of the parametrization")
    p, q = (Fraction(x) for x in sol.particular)
    if p.denominator != 1 or q.denominator != 1:
        raise ValueError("box vector not an integral combination of the parametrization")
    p, q = int(p), int(q)
    Lops = [_affine_op(t) for t in thetas]
    plus = ThetaOperator.const(1)
    minus = ThetaOperator.const(1)
    for i, x in enumerate(u):
        if x > 0:
            plus = plus * _falling(Lops[i], x)
        elif x < 0:
            minus = minus * _falling(Lops[i], -x)
    left = ThetaOperator({(max(-p, 0), max(-q, 0), 0, 0): 1})
    right = ThetaOperator({(max(p, 0), max(q, 0), 0, 0): 1})
    return left * plus - right * minus


def reduce_to_theta(sys: GkzSystem, param: tuple[Sequence[int], Sequence[int]]) -> tuple[ThetaOperator, ThetaOperator]:
    ell, emm = param
    thetas = solve_euler(sys, ell, emm)
    ops = [reduce_box(u, thetas, ell, emm) for u in sys.kernel]
    return ops[0], ops[1]


def gkz_operators(j: int) -> tuple[ThetaOperator, ThetaOperator]:
    """Polytope -> GKZ matrix -> reduced two-variable operators."""
    return reduce_to_theta(gkz_from_polytope(gkz_matrix(polytope(j))), parametrization(j))


# ---------------------------------------------------------------------------
# printed operators


PRINTED = {
    (0, "D1"): "thl*(thl+2*thm) - lam*(2*thl+5*thm+1)*(2*thl+5*thm+2)",
    (0, "D2"): "lam^2*thm^3 + mu*thl*(thl-1)*(2*thl+5*thm+1)",
    (0, "D3"): "lam^2*(4*thl^2-2*thl*thm+5*thm^2) - 8*lam^3*(1+3*thl+5*thm+2*thl^2+5*thl*thm)"
               " + 25*mu*thl*(thl-1)",
    (1, "D1"): "lam*thm^2 - mu*thl^2",
    (1, "D2"): "lam*(3*thl+3*thm)*(3*thl+3*thm-1)*(3*thl+3*thm-2)",
    (1, "D3"): "1/27*thl^2 + lam*(2/9 + thl + thm + thl^2 + 2*thl*thm + thm^2)",
    (2, "D1"): "lam*thm^2 + mu*thl*(3*thl+4*thm+1)",
    (2, "D2"): "thl*(thl+thm)^2 + lam*(3*thl+4*thm+1)*(3*thl+4*thm+2)*(3*thl+4*thm+3)",
    (2, "D3"): "lam*thl*(3*thl+2*thm) + mu*thl*(1-thl) + 9*lam^2*(3*thl+4*thm+1)*(3*thl+4*thm+2)",
    (3, "D1"): "thl^2 - mu*(3*thl+2*thm+1)*(3*thl+2*thm+2)",
    (3, "D2"): "thl^3 + lam*(3*thl+2*thm+1)*(3*thl+2*thm+2)*(3*thl+2*thm+3)",
    (3, "D3"): "thl*(3*thl-2*thm) + 9*lam*(3*thl+2*thm+1)*(3*thl+2*thm+2) + 4*mu*thl*(3*thl+2*thm+1)",
}

# Forms that annihilate the period; each agrees with the GKZ reduction.
CORRECTED = {
    (1, "D2"): "thl^2*(thl+thm) + lam*(3*thl+3*thm+1)*(3*thl+3*thm+2)*(3*thl+3*thm+3)",
    (3, "D1"): "thm^2 - mu*(3*thl+2*thm+1)*(3*thl+2*thm+2)",
}


def printed_operator(j: int, name: str) -> ThetaOperator:
    return parse_operator(PRINTED[(j, name)])


def operator(j: int, name: str) -> ThetaOperator:
    """Operator used downstream: the printed one unless a correction is recorded."""
    text = CORRECTED.get((j, name), PRINTED[(j, name)])
    return parse_operator(text)


def operators(j: int) -> dict[str, ThetaOperator]:
    return {name: operator(j, name) for name in ("D1", "D2", "D3")}


# ---------------------------------------------------------------------------
# indeterminate coefficients


ANSATZ = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))  # f1..f6 multiply these theta monomials


@dataclass(frozen=True)
class AnnihilatorResult:
    basis: tuple[ThetaOperator, ...]
    checked_order: int
    degenerate: bool  # the series carried no information (e.g. zero series)


def find_annihilator(s: BiSeries, degree: int | Sequence[int] = 3) -> AnnihilatorResult:
    """All D = f1 + f2 thl + f3 thm + f4 thl^2 + f5 thl thm + f6 thm^2 with
    deg f_k <= degree[k] that kill ``s`` through its valid order."""
    degs = [degree] * 6 if isinstance(degree, int) else list(degree)
    if len(degs) != 6:
        raise ValueError("need six degree bounds")
    unknowns: list[Key] = []
    for (a, b), d in zip(ANSATZ, degs):
        for tot in range(d + 1):
            for i in range(tot + 1):
                unknowns.append((i, tot - i, a, b))
    shift = max(degs)
    order = s.order - shift
    if order < 0:
        raise ValueError("series order too small for the degree bounds")
    idx = [(n, t - n) for t in range(order + 1) for n in range(t + 1)]
    rows = []
    for (N, M) in idx:
        row = []
        for (i, j, a, b) in unknowns:
            n, m = N - i, M - j
            row.append(Fraction(n**a * m**b) * s[(n, m)] if n >= 0 and m >= 0 else Fraction(0))
        rows.append(row)
    degenerate = all(v == 0 for row in rows for v in row)
    basis = []
    for vec in nullspace(rows):
        basis.append(ThetaOperator({k: Fraction(v) for k, v in zip(unknowns, vec)}))
    return AnnihilatorResult(tuple(basis), order, degenerate)


def in_span(op: ThetaOperator, basis: Sequence[ThetaOperator]) -> bool:
    keys = sorted(set(op.terms).union(*(b.terms for b in basis)))
    A = [[b.terms.get(k, Fraction(0)) for b in basis] for k in keys]
    rhs = [op.terms.get(k, Fraction(0)) for k in keys]
    if not basis:
        return op.is_zero()
    return solve_linear(A, rhs).consistent
