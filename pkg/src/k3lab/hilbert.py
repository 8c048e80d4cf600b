"""Icosahedral invariants and rank-4 second-order systems in two variables.

A system here is

    Z_XX = l Z_XY + a Z_X + b Z_Y + p Z
    Z_YY = m Z_XY + c Z_X + d Z_Y + q Z

with coefficients in a rational-function field Q(X, Y).  The module covers
coordinate changes of such systems, the normalization-factor formulas for the
coefficients a..d, recovery of p, q from integrability, and the concrete
correspondence between the period equation of family 0 and the uniformizing
equation on the (x, y) plane of Klein's invariants.

Normalization factors carry half-integer exponents, so they are never built as
functions.  Only their logarithmic differentials enter, which keeps everything
inside the rational-function field.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from sympy.functions.combinatorial.numbers import stirling
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .exactcore import (
    gens,
    irreducible_factors,
    parse,
    parse_poly,
    partial,
    poly_ring,
    rf_field,
    substitute,
    to_field,
    var_names,
)
from .periods import ThetaOperator, operator

COEFFS = ("l", "m", "a", "b", "c", "d", "p", "q")
LM = ("lam", "mu")
XY = ("x", "y")


# ---------------------------------------------------------------------------
# Klein's icosahedral invariants


@dataclass(frozen=True)
class KleinInvariants:
    A: object
    B: object
    C: object
    D: object

    def degrees(self) -> tuple[int, int, int, int]:
        return tuple(_total_degree(f) for f in (self.A, self.B, self.C, self.D))


def _total_degree(f) -> int:
    return max(sum(m) for m in f.monoms())


ZETA = ("z0", "z1", "z2")

_KLEIN_TEXT = {
    "A": "z0^2 + z1*z2",
    "B": "8*z0^4*z1*z2 - 2*z0^2*z1^2*z2^2 + z1^3*z2^3 - z0*(z1^5 + z2^5)",
    "C": ("320*z0^6*z1^2*z2^2 - 160*z0^4*z1^3*z2^3 + 20*z0^2*z1^4*z2^4 + 6*z1^5*z2^5"
          " - 4*z0*(z1^5 + z2^5)*(32*z0^4 - 20*z0^2*z1*z2 + 5*z1^2*z2^2) + z1^10 + z2^10"),
    "12D": ("(z1^5 - z2^5)*(-1024*z0^10 + 3840*z0^8*z1*z2 - 3840*z0^6*z1^2*z2^2"
            " + 1200*z0^4*z1^3*z2^3 - 100*z0^2*z1^4*z2^4 + z1^5*z2^5)"
            " + z0*(z1^10 - z2^10)*(352*z0^4 - 160*z0^2*z1*z2 + 10*z1^2*z2^2)"
            " + (z1^15 - z2^15)"),
}


@lru_cache(maxsize=None)
def klein_invariants() -> KleinInvariants:
    """The four invariants in Q[z0, z1, z2].

    The printed C contains a factor ``z1*z5``; there is no fifth coordinate and
    ``z1*z2`` is the only reading that keeps C homogeneous of degree 10.
    """
    A = parse_poly(_KLEIN_TEXT["A"], ZETA)
    B = parse_poly(_KLEIN_TEXT["B"], ZETA)
    C = parse_poly(_KLEIN_TEXT["C"], ZETA)
    D = parse_poly(_KLEIN_TEXT["12D"], ZETA).quo_ground(QQ(12))
    return KleinInvariants(A, B, C, D)


def klein_relation_sides(K: KleinInvariants | None = None):
    """(144 D^2, right-hand side) of the quintic relation among the invariants."""
    K = K or klein_invariants()
    A, B, C, D = K.A, K.B, K.C, K.D
    lhs = 144 * D**2
    rhs = (-1728 * B**5 + 720 * A * C * B**3 - 80 * A**2 * C**2 * B
           + 64 * A**3 * (5 * B**2 - A * C) ** 2 + C**3)
    return lhs, rhs


def verify_klein_relation() -> bool:
    lhs, rhs = klein_relation_sides()
    return lhs == rhs


def evaluate_klein_relation(point: Sequence) -> tuple[Fraction, Fraction]:
    """Both sides of the relation at a rational point of (z0, z1, z2)."""
    lhs, rhs = klein_relation_sides()
    pt = [QQ(Fraction(c).numerator, Fraction(c).denominator) for c in point]
    return Fraction(str(lhs(*pt))), Fraction(str(rhs(*pt)))


def swap_z1_z2(f):
    return f.ring({(e0, e2, e1): c for (e0, e1, e2), c in f.terms()})


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class ConformalStructure:
    """l dX^2 + 2 dX dY + m dY^2."""

    l: object
    m: object

    def __post_init__(self):
        if 1 - self.l * self.m == 0:
            raise ValueError("degenerate conformal structure: 1 - l*m vanishes identically")


@dataclass(frozen=True)
class SecondOrderSystem:
    l: object
    m: object
    a: object
    b: object
    c: object
    d: object
    p: object
    q: object

    @classmethod
    def from_texts(cls, texts: Mapping[str, str], names: Sequence[str]) -> "SecondOrderSystem":
        return cls(**{k: parse(texts[k], names) for k in COEFFS})

    @property
    def field(self):
        return self.l.field

    @property
    def names(self) -> tuple[str, str]:
        return var_names(self.l)

    def coefficients(self) -> dict[str, object]:
        return {k: getattr(self, k) for k in COEFFS}

    def conformal_structure(self) -> ConformalStructure:
        return ConformalStructure(self.l, self.m)

    def differences(self, other: "SecondOrderSystem") -> list[str]:
        """Names of coefficients that differ (compared as canonical fractions)."""
        out = []
        for k in COEFFS:
            u, v = getattr(self, k), getattr(other, k)
            if u.numer * v.denom != v.numer * u.denom:
                out.append(k)
        return out

    def __eq__(self, other):
        if not isinstance(other, SecondOrderSystem):
            return NotImplemented
        return self.names == other.names and not self.differences(other)

    __hash__ = object.__hash__

    def integrability_residual(self) -> list:
        """Coefficients (on Z, Z_X, Z_Y, Z_XY) of the two expansions of Z_XXYY."""
        X, Y = self.names
        rows = _compatibility(self, _Jet.const(self.p), _Jet.const(self.q), (0, 1, 2, 3), X, Y)
        return [r.constant() for r in rows]

    def is_integrable(self) -> bool:
        return all(r == 0 for r in self.integrability_residual())

    def to_texts(self) -> dict[str, str]:
        return {k: str(getattr(self, k).as_expr()) for k in COEFFS}


# ---------------------------------------------------------------------------
# affine jet expressions in unknown functions p, q


class _Jet:
    """sum c_k * J_k + c_0 with J_k = d^i/dX^i d^j/dY^j of p or q."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = {k: v for k, v in terms.items() if v != 0}

    @staticmethod
    def const(c) -> "_Jet":
        return _Jet({None: c})

    @staticmethod
    def unknown(name: str) -> "_Jet":
        return _Jet({(name, 0, 0): 1})

    def constant(self):
        if any(k is not None for k in self.terms):
            raise ValueError("expression still depends on unknown functions")
        return self.terms.get(None, 0)

    def is_const(self) -> bool:
        return all(k is None for k in self.terms)

    def __add__(self, other):
        other = other if isinstance(other, _Jet) else _Jet.const(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0) + v
        return _Jet(t)

    __radd__ = __add__

    def __neg__(self):
        return _Jet({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-(other if isinstance(other, _Jet) else _Jet.const(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, _Jet):
            if other.is_const():
                other = other.terms.get(None, 0)
            elif self.is_const():
                return other * self.terms.get(None, 0)
            else:
                raise ValueError("product of two unknown-dependent expressions")
        return _Jet({k: v * other for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        return _Jet({k: v / other for k, v in self.terms.items()})

    def diff(self, var: str, X: str) -> "_Jet":
        t: dict = {}
        for k, v in self.terms.items():
            dv = partial(v, var) if hasattr(v, "diff") else 0
            if dv != 0:
                t[k] = t.get(k, 0) + dv
            if k is not None:
                name, i, j = k
                nk = (name, i + 1, j) if var == X else (name, i, j + 1)
                t[nk] = t.get(nk, 0) + v
        return _Jet(t)


def _vec_diff(v, var, X):
    return [e.diff(var, X) for e in v]


def _compatibility(S, P: _Jet, Q: _Jet, rows: Iterable[int], X: str, Y: str) -> list[_Jet]:
    """Selected rows of d_Y(Z_XXY) - d_X(Z_XYY) in the frame (Z, Z_X, Z_Y, Z_XY)."""
    K = S.field
    one = K.one
    J = lambda c: _Jet.const(c)
    zxx = [P, J(S.a), J(S.b), J(S.l)]
    zyy = [Q, J(S.c), J(S.d), J(S.m)]
    unit = [[J(one if i == k else K.zero) for k in range(4)] for i in range(4)]

    def d_y(v, t2):
        dv = _vec_diff(v, Y, X)
        return [dv[k] + v[0] * unit[2][k] + v[1] * unit[3][k] + v[2] * zyy[k] + v[3] * t2[k]
                for k in range(4)]

    def d_x(v, t1):
        dv = _vec_diff(v, X, X)
        return [dv[k] + v[0] * unit[1][k] + v[1] * zxx[k] + v[2] * unit[3][k] + v[3] * t1[k]
                for k in range(4)]

    zero = [J(K.zero)] * 4
    a1 = d_y(zxx, zero)           # Z_XXY = a1 + l * Z_XYY
    a2 = d_x(zyy, zero)           # Z_XYY = a2 + m * Z_XXY
    det = one - S.l * S.m
    if det == 0:
        raise ValueError("1 - l*m vanishes identically")
    t1 = [(a1[k] + a2[k] * S.l) / det for k in range(4)]
    t2 = [a2[k] + t1[k] * S.m for k in range(4)]

    out = []
    dt1 = _vec_diff(t1, Y, X)
    dt2 = _vec_diff(t2, X, X)
    for k in rows:
        lhs = dt1[k] + t1[0] * unit[2][k] + t1[1] * unit[3][k] + t1[2] * zyy[k] + t1[3] * t2[k]
        rhs = dt2[k] + t2[0] * unit[1][k] + t2[1] * zxx[k] + t2[2] * unit[3][k] + t2[3] * t1[k]
        out.append(lhs - rhs)
    return out


# ---------------------------------------------------------------------------
# coordinate change


def jacobian(change: Sequence, names: Sequence[str]):
    U, V = change
    X, Y = names
    return partial(U, X) * partial(V, Y) - partial(U, Y) * partial(V, X)


def transform_system(S: SecondOrderSystem, change: Sequence, inverse: Sequence | None = None,
                     new_names: Sequence[str] | None = None) -> SecondOrderSystem:
    """Rewrite ``S`` in new coordinates U = change[0], V = change[1].

    ``change`` lives in the field of ``S``.  The barred coefficients are first
    computed as functions of the old coordinates; when ``inverse`` (the old
    coordinates as functions of U, V) is given they are pulled back to the new
    ones, otherwise they stay in the old field.
    """
    X, Y = S.names
    K = S.field
    U, V = (to_field(f, K) for f in change)
    Ux, Uy, Vx, Vy = partial(U, X), partial(U, Y), partial(V, X), partial(V, Y)
    delta = Ux * Vy - Uy * Vx
    if delta == 0:
        raise ValueError("degenerate coordinate change: Jacobian vanishes identically")
    l, m = S.l, S.m
    lam_ = l * Vy**2 - 2 * Vx * Vy + m * Vx**2
    mu_ = l * Uy**2 - 2 * Ux * Uy + m * Ux**2
    nu_ = l * Uy * Vy - Ux * Vy - Uy * Vx + m * Ux * Vx
    if nu_ == 0:
        raise ValueError("coordinate change is characteristic for the conformal structure")
    alpha = (Vx**2 - l * Vx * Vy) / delta
    beta = (Vy**2 - m * Vx * Vy) / delta
    gamma = (Ux**2 - l * Ux * Uy) / delta
    delta_ = (Uy**2 - m * Ux * Uy) / delta

    def R(F):
        return partial(partial(F, X), X) - (l * partial(partial(F, X), Y) + S.a * partial(F, X)
                                             + S.b * partial(F, Y))

    def Sop(F):
        return partial(partial(F, Y), Y) - (m * partial(partial(F, X), Y) + S.c * partial(F, X)
                                             + S.d * partial(F, Y))

    RU, SU, RV, SV = R(U), Sop(U), R(V), Sop(V)
    bar = {
        "l": -lam_ / nu_,
        "m": -mu_ / nu_,
        "a": (RU * beta - SU * alpha) / nu_,
        "b": (RV * beta - SV * alpha) / nu_,
        "c": (SU * gamma - RU * delta_) / nu_,
        "d": (SV * gamma - RV * delta_) / nu_,
        "p": (alpha * S.q - beta * S.p) / nu_,
        "q": (delta_ * S.p - gamma * S.q) / nu_,
    }
    if inverse is not None:
        Kn = inverse[0].field
        bind = {X: inverse[0], Y: inverse[1]}
        bar = {k: substitute(v, bind, Kn) for k, v in bar.items()}
    elif new_names is not None:
        Kn = rf_field(tuple(new_names))
        bar = {k: substitute(v, {}, Kn) for k, v in bar.items()}
    return SecondOrderSystem(**bar)


# ---------------------------------------------------------------------------
# normalization factor -> a, b, c, d


@dataclass(frozen=True)
class LogDifferential:
    """Components (theta_X, theta_Y) of d(theta)."""

    tx: object
    ty: object

    @classmethod
    def from_power_product(cls, factors: Iterable[tuple[object, Fraction]], names: Sequence[str],
                           scale=Fraction(1, 2)) -> "LogDifferential":
        """d(scale * log prod f^e); the default scale turns e^{2 theta} into theta."""
        X, Y = names
        K = rf_field(tuple(names))
        tx, ty = K.zero, K.zero
        for f, e in factors:
            f = to_field(f, K)
            e = Fraction(e) * Fraction(scale)
            w = K(QQ(e.numerator, e.denominator))
            tx += w * partial(f, X) / f
            ty += w * partial(f, Y) / f
        return cls(tx, ty)

    @classmethod
    def zero(cls, names: Sequence[str]) -> "LogDifferential":
        K = rf_field(tuple(names))
        return cls(K.zero, K.zero)

    def is_closed(self) -> bool:
        X, Y = var_names(self.tx) if hasattr(self.tx, "field") else XY
        return partial(self.tx, Y) == partial(self.ty, X)


def coeffs_from_normalization(l, m, theta: LogDifferential, names: Sequence[str] | None = None):
    """(a, b, c, d) that put the projective solution on a non-degenerate quadric.

    With xi = log(1 - l m):
      a = (xi/4 + theta)_X - (l/2) (log l - xi/4 + theta)_Y
      b = (l/2) (log l - 3 xi/4 - theta)_X
      c = (m/2) (log m - 3 xi/4 - theta)_Y
      d = (xi/4 + theta)_Y - (m/2) (log m - xi/4 + theta)_X
    Products l * (log l)_X are taken as l_X so that l = 0 is allowed.
    """
    K = l.field
    X, Y = names or var_names(l)
    m = to_field(m, K)
    one_minus = K.one - l * m
    if one_minus == 0:
        raise ValueError("l*m = 1 identically")
    tx, ty = to_field(theta.tx, K), to_field(theta.ty, K)
    xi_x = partial(one_minus, X) / one_minus
    xi_y = partial(one_minus, Y) / one_minus
    q4 = K(QQ(1, 4))
    half = K(QQ(1, 2))
    a = q4 * xi_x + tx - half * (partial(l, Y) + l * (-q4 * xi_y + ty))
    b = half * (partial(l, X) - l * (3 * q4 * xi_x + tx))
    c = half * (partial(m, Y) - m * (3 * q4 * xi_y + ty))
    d = q4 * xi_y + ty - half * (partial(m, X) + m * (-q4 * xi_x + tx))
    return a, b, c, d


# ---------------------------------------------------------------------------
# p, q from integrability


class IntegrabilityError(ValueError):
    pass


@dataclass(frozen=True)
class PQSolution:
    p: object
    q: object
    freedom: int        # dimension of the remaining solution space inside the ansatz
    ansatz_denominator: object


def _ansatz_denominator(coeffs: Sequence):
    K = coeffs[0].field
    R = K.ring
    den = R.one
    seen = set()
    for f in coeffs:
        for g, _ in irreducible_factors(f.denom) if not f.denom.is_ground else []:
            key = g.monic()
            if key not in seen:
                seen.add(key)
                den *= key**2
    return den


def _monomials(R, deg: int):
    X, Y = R.gens
    return [X**i * Y**j for i in range(deg + 1) for j in range(deg + 1 - i)]


def solve_pq(l, m, a, b, c, d, degree_slack: int = 0) -> PQSolution:
    """Rational p, q making the system integrable.

    The fourth-order compatibility rows on Z_X and Z_Y are linear in p, q and
    their first derivatives.  p and q are sought as N/den with den the squared
    product of the irreducible denominator factors of l..d and deg N bounded by
    deg den; the rows then become a linear system over Q for the coefficients
    of N.  The remaining row (which is quadratic in p, q) is checked on the
    solution.
    """
    K = l.field
    X, Y = var_names(l)
    m, a, b, c, d = (to_field(f, K) for f in (m, a, b, c, d))
    probe = SecondOrderSystem(l, m, a, b, c, d, K.zero, K.zero)
    rows = _compatibility(probe, _Jet.unknown("p"), _Jet.unknown("q"), (1, 2), X, Y)

    den = _ansatz_denominator([l, m, a, b, c, d])
    R = K.ring
    deg = max(sum(mm) for mm in den.monoms()) + degree_slack
    mons = _monomials(R, deg)
    denK = K(den)

    cache: dict = {}

    def basis_jet(k: int, i: int, j: int):
        key = (k, i, j)
        if key not in cache:
            if i == 0 and j == 0:
                cache[key] = K(mons[k]) / denK
            elif i > 0:
                cache[key] = partial(basis_jet(k, i - 1, j), X)
            else:
                cache[key] = partial(basis_jet(k, i, j - 1), Y)
        return cache[key]

    n = len(mons)
    equations = []      # (list of K coefficients for 2n unknowns, constant)
    for row in rows:
        coeffs = [K.zero] * (2 * n)
        const = K.zero
        for key, v in row.terms.items():
            if key is None:
                const += v
                continue
            name, i, j = key
            off = 0 if name == "p" else n
            for k in range(n):
                coeffs[off + k] += v * basis_jet(k, i, j)
        equations.append((coeffs, const))

    lin_rows = []
    rhs = []
    for coeffs, const in equations:
        L = R.one
        for f in coeffs + [const]:
            if f != 0:
                L = L.lcm(f.denom)
        polys = [_clear(f, L, R) for f in coeffs]
        cpoly = _clear(const, L, R)
        monos = set(cpoly.monoms())
        for pp in polys:
            monos.update(pp.monoms())
        for mono in sorted(monos):
            lin_rows.append([pp.get(mono, QQ(0)) for pp in polys])
            rhs.append(-cpoly.get(mono, QQ(0)))

    ncols = 2 * n
    aug = DomainMatrix([r + [v] for r, v in zip(lin_rows, rhs)], (len(lin_rows), ncols + 1), QQ)
    rref, pivots = aug.rref()
    if ncols in pivots:
        raise IntegrabilityError("no rational p, q inside the ansatz satisfy the compatibility rows")
    dense = rref.to_list()
    sol = [QQ(0)] * ncols
    for r, pc in enumerate(pivots):
        sol[pc] = dense[r][ncols]
    freedom = ncols - len(pivots)
    Np = sum((K(mons[k]) * K(sol[k]) for k in range(n) if sol[k]), K.zero)
    Nq = sum((K(mons[k]) * K(sol[n + k]) for k in range(n) if sol[n + k]), K.zero)
    p, q = Np / denK, Nq / denK
    full = SecondOrderSystem(l, m, a, b, c, d, p, q)
    if not full.is_integrable():
        raise IntegrabilityError("compatibility rows solved but the remaining row fails")
    return PQSolution(p, q, freedom, den)


def _clear(f, L, R):
    """Polynomial f * L where L is a multiple of the denominator of f."""
    if f == 0:
        return R.zero
    num, den = f.numer, f.denom
    quot, rem = L.div(den)
    if rem != 0:
        raise ArithmeticError("denominator does not divide the common multiple")
    return num * quot


def pq_from_integrability(l, m, a, b, c, d) -> tuple[object, object]:
    s = solve_pq(l, m, a, b, c, d)
    return s.p, s.q


def system_from_normalization(l, m, theta: LogDifferential) -> SecondOrderSystem:
    a, b, c, d = coeffs_from_normalization(l, m, theta)
    p, q = pq_from_integrability(l, m, a, b, c, d)
    K = l.field
    return SecondOrderSystem(l, to_field(m, K), a, b, c, d, p, q)


# ---------------------------------------------------------------------------
# theta operators -> partial-derivative form


def theta_to_partials(op: ThetaOperator, names: Sequence[str] = LM) -> dict[tuple[int, int], object]:
    """Coefficients of d^i/dlam^i d^j/dmu^j, using thl^a = sum_k S(a,k) lam^k d^k."""
    K = rf_field(tuple(names))
    g = gens(K)
    lam, mu = g[names[0]], g[names[1]]
    out: dict[tuple[int, int], object] = {}
    for (a, b), poly in op.coefficient_polys().items():
        cf = to_field(poly, K) if names == LM else substitute(poly, {"lam": lam, "mu": mu}, K)
        for i in range(a + 1):
            si = int(stirling(a, i)) if a else 1
            if not si:
                continue
            for j in range(b + 1):
                sj = int(stirling(b, j)) if b else 1
                if not sj:
                    continue
                term = cf * si * sj * lam**i * mu**j
                out[(i, j)] = out.get((i, j), K.zero) + term
    return {k: v for k, v in out.items() if v != 0}


def second_order_from_operators(op1: ThetaOperator, op2: ThetaOperator,
                                names: Sequence[str] = LM) -> SecondOrderSystem:
    """Solve two second-order operators for z_XX and z_YY."""
    K = rf_field(tuple(names))
    rows = [theta_to_partials(op, names) for op in (op1, op2)]
    for r in rows:
        if any(i + j > 2 for (i, j) in r):
            raise ValueError("operators must have order at most two")
    get = lambda r, k: r.get(k, K.zero)
    a11, a12 = get(rows[0], (2, 0)), get(rows[0], (0, 2))
    a21, a22 = get(rows[1], (2, 0)), get(rows[1], (0, 2))
    det = a11 * a22 - a12 * a21
    if det == 0:
        raise ValueError("operators do not determine both pure second derivatives")

    def solve(key):
        # z_XX, z_YY components of -(sum over key) after inverting the 2x2 block
        r1, r2 = -get(rows[0], key), -get(rows[1], key)
        return (a22 * r1 - a12 * r2) / det, (-a21 * r1 + a11 * r2) / det

    l, m = solve((1, 1))
    a, c = solve((1, 0))
    b, d = solve((0, 1))
    p, q = solve((0, 0))
    return SecondOrderSystem(l, m, a, b, c, d, p, q)


# ---------------------------------------------------------------------------
# concrete systems

_T = "(lam + 16*lam^2 - 80*lam^3 + 125*mu)"
PERIOD_TEXTS = {
    "l": f"2*mu*(-1 + 15*lam + 100*lam^2)/{_T}",
    "m": f"2*(lam^2 - 8*lam^3 + 16*lam^4 + 5*mu - 50*lam*mu)/(mu*{_T})",
    "a": f"(-1 + 10*lam)*(1 + 20*lam)/{_T}",
    "b": f"5*mu*(3 + 40*lam)/{_T}",
    "c": f"-5*(-1 + 10*lam)/(mu*{_T})",
    "d": f"(-lam - 20*lam^2 + 96*lam^3 - 200*mu)/(mu*{_T})",
    "p": f"2*(1 + 20*lam)/{_T}",
    "q": f"-10/(mu*{_T})",
}

_S = "(36*x^2 - 32*x - y)"
CONFORMAL_TEXTS = {
    "l": f"-20*(4*x^2 + 3*x*y - 4*y)/{_S}",
    "m": f"-2*(54*x^3 - 50*x^2 - 3*x*y + 2*y)/(5*y*{_S})",
}
UNIFORMIZING_TEXTS = {
    **CONFORMAL_TEXTS,
    "a": f"-2*(20*x^3 - 8*x*y + 9*x^2*y + y^2)/(x*y*{_S})",
    "b": f"10*y*(-8 + 3*x)/(x*{_S})",
    "c": f"-2*(-25*x^2 + 27*x^3 + 2*y - 3*x*y)/(5*y^2*{_S})",
    "d": f"-2*(-120*x^2 + 135*x^3 - 2*y - 3*x*y)/(5*x*y*{_S})",
    "p": f"-2*(8*x - y)/(x^2*{_S})",
    "q": f"-2*(-10 + 9*x)/(25*x*y*{_S})",
}
SATO_TEXTS = {
    **CONFORMAL_TEXTS,
    "a": f"-20*(3*x - 2)/{_S}",
    "b": f"-10*(8*x + 3*y)/{_S}",
    "c": f"(3*x - 2)/(5*y*{_S})",
    "d": f"(-198*x^2 + 180*x + 7*y)/(5*y*{_S})",
    "p": f"-3/{_S}",
    "q": f"3/(100*y*{_S})",
}

BRANCH_QUINTIC = "1728*x^5 - 720*x^3*y + 80*x*y^2 - 64*(5*x^2 - y)^2 - y^3"


class DerivationMismatch(ValueError):
    pass


def printed_period_system() -> SecondOrderSystem:
    return SecondOrderSystem.from_texts(PERIOD_TEXTS, LM)


def derived_period_system() -> SecondOrderSystem:
    """Second-order form of the family-0 operators D1 and D3."""
    return second_order_from_operators(operator(0, "D1"), operator(0, "D3"))


@lru_cache(maxsize=None)
def period_system() -> SecondOrderSystem:
    printed = printed_period_system()
    diff = printed.differences(derived_period_system())
    if diff:
        raise DerivationMismatch(f"printed period system disagrees with D1/D3 in {diff}")
    return printed


def uniformizing_system() -> SecondOrderSystem:
    return SecondOrderSystem.from_texts(UNIFORMIZING_TEXTS, XY)


def sato_system() -> SecondOrderSystem:
    return SecondOrderSystem.from_texts(SATO_TEXTS, XY)


def conformal_structure_xy() -> ConformalStructure:
    return ConformalStructure(parse(CONFORMAL_TEXTS["l"], XY), parse(CONFORMAL_TEXTS["m"], XY))


def branch_quintic():
    return parse_poly(BRANCH_QUINTIC, XY)


def branch_locus():
    """y times the quintic: the index-2 branch divisor in the affine (x, y) plane."""
    R = poly_ring(XY)
    return R.gens[1] * branch_quintic()


def printed_normalization() -> LogDifferential:
    """theta for e^{2 theta} = x^4 (-36x^2+32x+y) y^{-5/2} Q^{-3/2}."""
    x, y = poly_ring(XY).gens
    return LogDifferential.from_power_product(
        [(x, 4), (-36 * x**2 + 32 * x + y, 1), (y, Fraction(-5, 2)),
         (branch_quintic(), Fraction(-3, 2))], XY)


def sato_normalization() -> LogDifferential:
    """theta for e^{2 theta} = (-36x^2+32x+y) y^{-1/2} Q^{-3/2}."""
    x, y = poly_ring(XY).gens
    return LogDifferential.from_power_product(
        [(-36 * x**2 + 32 * x + y, 1), (y, Fraction(-1, 2)),
         (branch_quintic(), Fraction(-3, 2))], XY)


# ---------------------------------------------------------------------------
# the birational map between the (lam, mu) and (x, y) planes


def birational_f() -> tuple[object, object]:
    """(x, y) = (25 mu / (2 (lam-1/4)^3), -3125 mu^2 / (lam-1/4)^5)."""
    return (parse("25*mu/(2*(lam - 1/4)^3)", LM), parse("-3125*mu^2/(lam - 1/4)^5", LM))


def birational_f_inverse() -> tuple[object, object]:
    """(lam, mu) = (1/4 - y/(20 x^2), -y^3/(10^5 x^5))."""
    return (parse("1/4 - y/(20*x^2)", XY), parse("-y^3/(10^5*x^5)", XY))


def compose_pair(outer: Sequence, inner: Sequence):
    """outer o inner, where outer is written in the variables inner maps into."""
    names = var_names(outer[0])
    K = inner[0].field
    bind = dict(zip(names, inner))
    return tuple(substitute(f, bind, K) for f in outer)


def pullback_to_xy(f):
    """Express a function of (lam, mu) in the (x, y) coordinates."""
    lam, mu = birational_f_inverse()
    return substitute(to_field(f, rf_field(LM)), {"lam": lam, "mu": mu}, rf_field(XY))


def map_derivatives() -> dict[str, object]:
    """First and second derivatives of f, expressed in (x, y)."""
    x, y = birational_f()
    out = {}
    for name, F in (("x", x), ("y", y)):
        for key, path in (("lam", "lam"), ("mu", "mu"), ("lamlam", "lam lam"),
                          ("mumu", "mu mu"), ("lammu", "lam mu")):
            g = F
            for v in path.split():
                g = partial(g, v)
            out[f"{name}_{key}"] = pullback_to_xy(g)
    return out


def transformed_period_system() -> SecondOrderSystem:
    return transform_system(period_system(), birational_f(), birational_f_inverse())


def branch_pullback():
    """The branch quintic composed with f, as a rational function of (lam, mu)."""
    return substitute(to_field(branch_quintic(), rf_field(XY)),
                      dict(zip(XY, birational_f())), rf_field(LM))


def branch_pullback_factors() -> list[tuple[object, int]]:
    f = branch_pullback()
    return [(g.monic(), e) for g, e in irreducible_factors(f.numer)]


# ---------------------------------------------------------------------------
# certificate


def verify_all() -> list[dict]:
    """One record per claim of the correspondence."""
    out = []

    def rec(claim, ok, detail=""):
        out.append({"claim": claim, "verdict": "pass" if ok else "fail", "detail": detail})

    rec("klein.relation", verify_klein_relation())
    K = klein_invariants()
    rec("klein.degrees", K.degrees() == (2, 6, 10, 15), str(K.degrees()))
    try:
        period_system()
        rec("period_system.derived", True)
    except DerivationMismatch as e:
        rec("period_system.derived", False, str(e))
    fx, fy = compose_pair(birational_f(), birational_f_inverse())
    g = gens(rf_field(XY))
    rec("f.inverse", fx == g["x"] and fy == g["y"])
    T = transformed_period_system()
    diff = T.differences(uniformizing_system())
    rec("transform.period_to_uniformizing", not diff, ",".join(diff))
    cs = transform_system(printed_period_system(), birational_f(), birational_f_inverse())
    U = conformal_structure_xy()
    rec("transform.conformal_structure", cs.l == U.l and cs.m == U.m)
    for label, theta, target in (("printed", printed_normalization(), uniformizing_system()),
                                 ("sato", sato_normalization(), sato_system())):
        S = system_from_normalization(U.l, U.m, theta)
        diff = S.differences(target)
        rec(f"normalization.{label}", not diff, ",".join(diff))
        rec(f"normalization.{label}.closed", theta.is_closed())
        rec(f"integrable.{label}", target.is_integrable())
    locus = singular_locus_factor()
    rec("branch.pullback", any(g == locus for g, _ in branch_pullback_factors()))
    return out


def singular_locus_factor():
    from .fibrations import singular_locus

    return singular_locus(0)[-1].monic()
