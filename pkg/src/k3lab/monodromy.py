"""Arithmetic group checks and numerical monodromy of the Pfaffian systems.

The exact part tests integral isometries of A0 and which component of the
period domain they preserve.  The numerical part integrates

    dY = (alpha dlam + beta dmu) Y,   Y(start) = I

along closed loops in parameter space, where (alpha, beta) is the ordinary
frame of a family's Pfaffian connection.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import sympy
from scipy.integrate import solve_ivp

from .lattices import TRANSCENDENTAL, GramMatrix
from .pfaffian import PfaffianSystem, denominator_factors, derived_system

IntMat = list[list[int]]

A0 = TRANSCENDENTAL[0]

GENERATORS: dict[str, IntMat] = {
    "G1": [[1, 1, -1, 2], [0, 1, 0, 0], [0, 0, 1, 0], [0, 1, 0, 1]],
    "G2": [[1, -1, -2, -1], [0, 1, 0, 0], [0, 1, 1, 0], [0, 0, 0, 1]],
    "G3": [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 1, -1]],
    "H1": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, -1, 1]],
    "H2": [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
}
PO_GENERATORS = ("G1", "G2", "G3", "H1", "H2")
PO_PLUS_GENERATORS = ("G1", "G2", "G3", "H2")


def _as_int(g: Sequence[Sequence]) -> IntMat:
    return [[int(x) for x in row] for row in g]


def _mul(a: IntMat, b: IntMat) -> IntMat:
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _t(a: IntMat) -> IntMat:
    return [list(r) for r in zip(*a)]


def is_isometry(g: Sequence[Sequence[int]], A: GramMatrix | Sequence[Sequence[int]] = A0) -> bool:
    """Exact test of tg A g = A with g invertible over Z."""
    Am = A.rows() if isinstance(A, GramMatrix) else _as_int(A)
    gm = _as_int(g)
    if len(gm) != len(Am) or any(len(r) != len(Am) for r in gm):
        return False
    if _mul(_mul(_t(gm), Am), gm) != Am:
        return False
    return abs(round(np.linalg.det(np.array(gm, dtype=float)))) == 1


def int_inverse(g: Sequence[Sequence[int]]) -> IntMat:
    """Inverse of a unimodular integer matrix."""
    m = sympy.Matrix(_as_int(g))
    if abs(m.det()) != 1:
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in m.inv().tolist()]


# ---------------------------------------------------------------------------
# components of the period domain

SQRT5 = math.sqrt(5)
W_T = np.array([[1.0, (1 - SQRT5) / 2], [1.0, (1 + SQRT5) / 2]])  # transpose of W
REFERENCE_POINT = np.array([1, 1, -1j, 0])


def iota(z1: complex, z2: complex) -> np.ndarray:
    """Point of the period domain attached to (z1, z2)."""
    tail = np.linalg.solve(W_T, np.array([z1, z2]))
    return np.array([z1 * z2, -1, tail[0], tail[1]], dtype=complex)


def iota_inverse(xi: Sequence[complex]) -> tuple[complex, complex]:
    xi = np.asarray(xi, dtype=complex)
    if abs(xi[1]) < 1e-12 * max(1.0, np.abs(xi).max()):
        raise ZeroDivisionError("second coordinate vanishes; point at the boundary chart")
    xi = xi / (-xi[1])
    z = W_T @ xi[2:]
    return complex(z[0]), complex(z[1])


def half_plane_signs(xi: Sequence[complex]) -> tuple[int, int]:
    z1, z2 = iota_inverse(xi)
    return int(np.sign(z1.imag)), int(np.sign(z2.imag))


def component_test(g: Sequence[Sequence[int]], A: GramMatrix = A0) -> bool:
    """True iff the isometry g maps the component through (1:1:-i:0) to itself."""
    if not is_isometry(g, A):
        raise ValueError("not an isometry of the form")
    gm = np.array(_as_int(g), dtype=complex)
    probes = [REFERENCE_POINT] + [iota(a, b) for a, b in ((2j, 3j), (0.5 + 1j, -0.3 + 2j), (1 + 0.7j, 2 + 1.3j))]
    for xi in probes:
        try:
            s = half_plane_signs(gm @ xi)
        except ZeroDivisionError:
            continue
        if s[0] != s[1]:
            raise ArithmeticError("image left the period domain")
        return s[0] == 1
    raise ArithmeticError("no usable probe point")


def random_word(rng: np.random.Generator, names: Sequence[str], length: int) -> tuple[list[str], IntMat]:
    """Random product of generators and their inverses."""
    g = [[int(i == j) for j in range(4)] for i in range(4)]
    word = []
    for _ in range(length):
        name = names[rng.integers(len(names))]
        h = GENERATORS[name]
        if rng.integers(2):
            h = int_inverse(h)
            name += "^-1"
        word.append(name)
        g = _mul(g, h)
    return word, g


# ---------------------------------------------------------------------------
# loops


@dataclass(frozen=True)
class Segment:
    """Straight line p0 -> p1, or a circle arc in one coordinate."""

    kind: str  # "line" or "arc"
    p0: tuple[complex, complex]
    p1: tuple[complex, complex] | None = None
    var: int = 0  # arc coordinate: 0 = lam, 1 = mu
    center: complex = 0j
    turns: float = 1.0  # signed number of turns

    def point(self, s: float) -> tuple[complex, complex]:
        if self.kind == "line":
            return tuple(a + s * (b - a) for a, b in zip(self.p0, self.p1))
        p = list(self.p0)
        p[self.var] = self.center + (self.p0[self.var] - self.center) * cmath.exp(2j * math.pi * self.turns * s)
        return tuple(p)

    def velocity(self, s: float) -> tuple[complex, complex]:
        if self.kind == "line":
            return tuple(b - a for a, b in zip(self.p0, self.p1))
        v = [0j, 0j]
        w = 2j * math.pi * self.turns
        v[self.var] = (self.p0[self.var] - self.center) * w * cmath.exp(w * s)
        return tuple(v)

    @property
    def end(self) -> tuple[complex, complex]:
        return self.point(1.0)


@dataclass(frozen=True)
class Loop:
    basepoint: tuple[complex, complex]
    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            return
        if max(abs(a - b) for a, b in zip(self.segments[0].p0, self.basepoint)) > 1e-12:
            raise ValueError("loop does not start at its basepoint")
        for a, b in zip(self.segments, self.segments[1:]):
            if max(abs(x - y) for x, y in zip(a.end, b.p0)) > 1e-12:
                raise ValueError("loop segments are not connected")
        if max(abs(x - y) for x, y in zip(self.segments[-1].end, self.basepoint)) > 1e-9:
            raise ValueError("loop is not closed")

    def then(self, other: "Loop") -> "Loop":
        """Traverse self, then other (same basepoint)."""
        return Loop(self.basepoint, self.segments + other.segments)

    def inverse(self) -> "Loop":
        segs = []
        for s in reversed(self.segments):
            if s.kind == "line":
                segs.append(Segment("line", s.p1, s.p0))
            else:
                segs.append(Segment("arc", s.end, var=s.var, center=s.center, turns=-s.turns))
        return Loop(self.basepoint, tuple(segs))

    def sample(self, n: int = 200) -> list[tuple[complex, complex]]:
        return [seg.point(k / n) for seg in self.segments for k in range(n + 1)]


def circle(var: str, basepoint: tuple[complex, complex], center: complex, turns: float = 1.0) -> Loop:
    """Circle in one coordinate around ``center``, starting at ``basepoint``."""
    v = {"lambda": 0, "lam": 0, "mu": 1}[var]
    return Loop(tuple(basepoint), (Segment("arc", tuple(basepoint), var=v, center=center, turns=turns),))


def constant_loop(basepoint: tuple[complex, complex]) -> Loop:
    return Loop(tuple(basepoint), ())


def polygon(points: Sequence[tuple[complex, complex]]) -> Loop:
    pts = [tuple(complex(x) for x in p) for p in points]
    if pts[0] != pts[-1]:
        pts.append(pts[0])
    segs = tuple(Segment("line", a, b) for a, b in zip(pts, pts[1:]))
    return Loop(pts[0], segs)


def conjugate_by_path(loop: Loop, start: tuple[complex, complex]) -> Loop:
    """Go from ``start`` to the loop's basepoint in a straight line, run the
    loop, and come back."""
    there = Segment("line", tuple(start), loop.basepoint)
    back = Segment("line", loop.basepoint, tuple(start))
    return Loop(tuple(start), (there,) + loop.segments + (back,))


# ---------------------------------------------------------------------------
# numerical connection


@dataclass
class NumericConnection:
    """Ordinary-frame matrices of a Pfaffian system as numpy callables."""

    system: PfaffianSystem
    _fn: Callable = field(init=False, repr=False)
    factors: list = field(init=False, repr=False)

    def __post_init__(self):
        lam, mu = sympy.symbols("lam mu")
        exprs = [[x.as_expr() for x in row] for row in self.system.alpha] + \
                [[x.as_expr() for x in row] for row in self.system.beta]
        flat = [e for row in exprs for e in row]
        self._fn = sympy.lambdify((lam, mu), flat, modules="numpy")
        self.factors = [sympy.lambdify((lam, mu), f.as_expr(), modules="numpy")
                        for f in sorted(denominator_factors(self.system), key=str)]

    def matrices(self, lam: complex, mu: complex) -> tuple[np.ndarray, np.ndarray]:
        vals = np.array(self._fn(complex(lam), complex(mu)), dtype=complex)
        return vals[:16].reshape(4, 4), vals[16:].reshape(4, 4)

    def distance_proxy(self, lam: complex, mu: complex) -> float:
        """Smallest |f(lam, mu)| over the denominator factors."""
        return min((abs(f(complex(lam), complex(mu))) for f in self.factors), default=math.inf)


@lru_cache(maxsize=None)
def connection(j: int) -> NumericConnection:
    return NumericConnection(derived_system(j))


@dataclass(frozen=True)
class TransportResult:
    M: np.ndarray
    error: float  # max entry difference between the two tolerance levels
    converged: bool

    def char_poly(self) -> np.ndarray:
        return np.poly(self.M)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.M)


class TransportError(RuntimeError):
    pass


def _integrate(conn: NumericConnection, loop: Loop, rtol: float) -> np.ndarray:
    Y = np.eye(4, dtype=complex)
    for seg in loop.segments:
        def rhs(s, y, seg=seg):
            lam, mu = seg.point(s)
            dl, dm = seg.velocity(s)
            a, b = conn.matrices(lam, mu)
            return ((a * dl + b * dm) @ y.reshape(4, 4)).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), Y.ravel(), method="DOP853", rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise TransportError(sol.message)
        Y = sol.y[:, -1].reshape(4, 4)
    return Y


def transport(P: PfaffianSystem | NumericConnection | int, loop: Loop, tol: float = 1e-8,
              clearance: float = 1e-10) -> TransportResult:
    """Monodromy matrix of ``loop`` (columns: continued fundamental solutions).

    The error estimate compares the run at ``tol`` with a run at ``tol/64``;
    the finer result is returned.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    conn = connection(P) if isinstance(P, int) else (P if isinstance(P, NumericConnection) else NumericConnection(P))
    for pt in loop.sample(64):
        if conn.distance_proxy(*pt) < clearance:
            raise TransportError(f"loop passes through the singular locus near {pt}")
    if not loop.segments:
        return TransportResult(np.eye(4, dtype=complex), 0.0, True)
    coarse = _integrate(conn, loop, tol)
    fine = _integrate(conn, loop, tol / 64)
    err = float(np.abs(coarse - fine).max())
    scale = max(1.0, float(np.abs(fine).max()))
    return TransportResult(fine, err, err <= 100 * tol * scale)


# ---------------------------------------------------------------------------
# singular values along a fibre and standard loops


def singular_mu_values(j: int, lam0: complex) -> list[complex]:
    """Roots in mu of every denominator factor at lam = lam0."""
    lam, mu = sympy.symbols("lam mu")
    out = []
    for f in denominator_factors(derived_system(j)):
        p = sympy.Poly(f.as_expr().subs(lam, lam0), mu)
        if p.degree() > 0:
            out.extend(complex(r) for r in np.roots([complex(c) for c in p.all_coeffs()]))
    return out


def singular_lambda_values(j: int, mu0: complex) -> list[complex]:
    lam, mu = sympy.symbols("lam mu")
    out = []
    for f in denominator_factors(derived_system(j)):
        p = sympy.Poly(f.as_expr().subs(mu, mu0), lam)
        if p.degree() > 0:
            out.extend(complex(r) for r in np.roots([complex(c) for c in p.all_coeffs()]))
    return out


def isolating_circle(var: str, j: int, fixed: complex, center: complex, fraction: float = 0.4) -> Loop:
    """Circle around ``center`` in ``var`` with the other coordinate fixed,
    radius a fraction of the distance to the next singular value."""
    vals = singular_mu_values(j, fixed) if var == "mu" else singular_lambda_values(j, fixed)
    vals = vals + [0j]
    others = [abs(v - center) for v in vals if abs(v - center) > 1e-9]
    r = fraction * min(others)
    start = center + r
    base = (fixed, start) if var == "mu" else (start, fixed)
    return circle(var, base, center)


def discriminant_circle(j: int, lam0: complex, near: complex = 0j, fraction: float = 0.4) -> Loop:
    """Circle in mu around the root of the discriminant factor nearest ``near``."""
    from .fibrations import singular_locus

    lam, mu = sympy.symbols("lam mu")
    F = singular_locus(j)[-1]
    p = sympy.Poly(F.as_expr().subs(lam, lam0), mu)
    roots = [complex(r) for r in np.roots([complex(c) for c in p.all_coeffs()])]
    root = min(roots, key=lambda r: abs(r - near))
    return isolating_circle("mu", j, lam0, root, fraction)


# ---------------------------------------------------------------------------
# checks on monodromy matrices


def is_identity(M: np.ndarray, tol: float) -> bool:
    return bool(np.abs(M - np.eye(len(M))).max() <= tol)


def integer_char_poly(M: np.ndarray, tol: float = 1e-6) -> list[int] | None:
    """Characteristic polynomial rounded to integers, or None if not close."""
    c = np.poly(M)
    r = np.round(c.real)
    if np.abs(c - r).max() > tol:
        return None
    return [int(x) for x in r]


def cyclotomic_orders(coeffs: Sequence[int]) -> list[int] | None:
    """Orders of the roots of unity of an integer polynomial, or None if it
    has a non-cyclotomic factor."""
    x = sympy.Symbol("x")
    _, facs = sympy.factor_list(sympy.Poly(list(coeffs), x).as_expr(), x)
    orders = []
    for f, e in facs:
        deg = sympy.degree(f, x)
        n = next((n for n in range(1, 16 * deg + 2)
                  if sympy.totient(n) == deg and sympy.expand(sympy.cyclotomic_poly(n, x) - sympy.Poly(f, x).monic().as_expr()) == 0), None)
        if n is None:
            return None
        orders.extend([n] * (deg * e))
    return sorted(orders)


def quasi_unipotent(M: np.ndarray, tol: float = 1e-6) -> tuple[bool, list[int]]:
    """Every eigenvalue a root of unity, decided on the rounded characteristic
    polynomial (eigenvalues of Jordan blocks are too ill-conditioned)."""
    cp = integer_char_poly(M, tol)
    if cp is None:
        return False, []
    orders = cyclotomic_orders(cp)
    return (orders is not None), (orders or [])


def char_poly_residual(M: np.ndarray) -> float:
    """Distance of the characteristic polynomial coefficients from integers."""
    c = np.poly(M)
    return float(np.abs(c - np.round(c.real)).max())


@dataclass(frozen=True)
class IntegralityReport:
    conjugated: np.ndarray
    rounded: IntMat
    residual: float
    integral: bool
    isometry: bool | None


def integrality_check(M: np.ndarray | TransportResult, B: np.ndarray, tol: float = 1e-6,
                      A: GramMatrix | None = A0) -> IntegralityReport:
    """B^-1 M B close to an integer matrix, and that matrix an isometry of A."""
    Mm = M.M if isinstance(M, TransportResult) else np.asarray(M)
    C = np.linalg.solve(B, Mm @ B)
    R = np.round(C.real).astype(int)
    res = float(np.abs(C - R).max())
    ok = res <= tol
    iso = is_isometry(R.tolist(), A) if (ok and A is not None) else None
    return IntegralityReport(C, R.tolist(), res, ok, iso)


def invariant_forms(mats: Sequence[np.ndarray], tol: float = 1e-7) -> list[np.ndarray]:
    """Symmetric Q with tM Q M = Q for every M (numerical nullspace)."""
    idx = [(i, j) for i in range(4) for j in range(i, 4)]

    def unit(i, j):
        E = np.zeros((4, 4), dtype=complex)
        E[i, j] = E[j, i] = 1
        return E

    rows = []
    for M in mats:
        cols = [(M.T @ unit(i, j) @ M - unit(i, j)).ravel() for i, j in idx]
        rows.append(np.array(cols).T)
    big = np.vstack(rows)
    _, sv, vh = np.linalg.svd(big)
    null = [vh[k].conj() for k in range(len(idx)) if k >= len(sv) or sv[k] <= tol * max(1.0, sv[0])]
    out = []
    for v in null:
        Q = sum(c * unit(i, j) for c, (i, j) in zip(v, idx))
        out.append(Q)
    return out


# ---------------------------------------------------------------------------
# integral basis from transported matrices


@dataclass(frozen=True)
class BasisFit:
    B: np.ndarray  # columns: integral basis in the Pfaffian frame
    form: IntMat  # invariant form in the fitted basis (a multiple of A)
    sign: int  # sign relating the raw invariant form to A
    residual: float  # worst distance of orbit coordinates from integers


def _rational_line(mats: Sequence[np.ndarray]) -> np.ndarray:
    """A vector spanning N^k for the unipotent with the longest Jordan chain.

    That image is a rational line for any integral structure, so the orbit
    of the vector spans a lattice (up to one complex scale)."""
    best, depth = None, 0
    for M in mats:
        N = M - np.eye(4)
        scale = max(1.0, float(np.abs(N).max()))
        k, P = 0, np.eye(4)
        while k < 4 and np.abs(P @ N).max() > 1e-7 * scale**(k + 1):
            P, k = P @ N, k + 1
        if k > depth and quasi_unipotent(M)[1] == [1, 1, 1, 1]:
            best, depth = P, k
    if best is None or depth == 0:
        raise ArithmeticError("no non-trivial unipotent among the matrices")
    u, s, _ = np.linalg.svd(best)
    if s[1] > 1e-6 * s[0]:
        raise ArithmeticError("top nilpotent image is not a line")
    return u[:, 0]


def fit_integral_basis(mats: Sequence[np.ndarray], A: GramMatrix = A0, depth: int = 3,
                       tol: float = 1e-6) -> BasisFit | None:
    """Search a basis in which every matrix is integral and preserves +-A.

    Returns None when no fit is found (inconclusive, not a contradiction).
    """
    from .lattices import find_congruence, gram

    v0 = _rational_line(mats)
    gens = list(mats) + [np.linalg.inv(M) for M in mats]
    orbit, frontier = [v0], [v0]
    for _ in range(depth):
        frontier = [g @ v for v in frontier for g in gens]
        orbit.extend(frontier)
    basis: list[np.ndarray] = []
    for v in orbit:
        if np.linalg.matrix_rank(np.array(basis + [v]), tol=1e-8 * np.abs(v).max()) > len(basis):
            basis.append(v)
        if len(basis) == 4:
            break
    if len(basis) < 4:
        return None
    B = np.array(basis).T
    coords = np.linalg.solve(B, np.array(orbit).T)
    residual = float(np.abs(coords - np.round(coords.real)).max())
    if residual > tol:
        return None
    ints = [np.round(np.linalg.solve(B, M @ B).real) for M in mats]
    forms = invariant_forms([c.astype(complex) for c in ints])
    if len(forms) != 1:
        return None
    Q = forms[0].real
    Q = Q / np.abs(Q).max()
    # clear denominators: entries of a primitive integral form scaled by its largest entry
    for den in range(1, 61):
        cand = np.round(Q * den)
        if np.abs(Q * den - cand).max() < 1e-6:
            break
    else:
        return None
    g = math.gcd(*[int(x) for x in cand.ravel()])
    Qi = [[int(x) // g for x in row] for row in cand]
    # Riemann relations: the period row xi satisfies xi Q^-1 xi = 0 and
    # xi Q^-1 conj(xi) > 0, which fixes the sign of the form.
    xi = B[0, :]
    pos = float((xi @ np.linalg.inv(np.array(Qi, dtype=float)) @ xi.conj()).real)
    sign = 1 if pos > 0 else -1
    c = find_congruence(gram([[sign * x for x in r] for r in Qi]), A, bound=3)
    if c is None:
        return None
    return BasisFit(B @ np.array(c, dtype=float), _mul(_mul(_t(c), [[sign * x for x in r] for r in Qi]), c),
                    sign, residual)


def period_point(fit: BasisFit, A: GramMatrix = A0) -> np.ndarray:
    """Period of the holomorphic form at the basepoint, as a point with
    eta A eta = 0 and eta A conj(eta) > 0."""
    return fit.B[0, :] @ np.linalg.inv(np.array(A.rows(), dtype=float))


def standard_loops(j: int = 0, lam0: complex = 0.1 + 0.03j) -> dict[str, Loop]:
    """Loops at a common basepoint: around mu = 0, around each root of the
    discriminant factors over lam0, and around lam = 0."""
    mu_loop = isolating_circle("mu", j, lam0, 0j)
    base = mu_loop.basepoint
    loops = {"mu": mu_loop}
    vals = sorted((v for v in singular_mu_values(j, lam0) if abs(v) > 1e-12), key=lambda v: (abs(v), v.real))
    for k, v in enumerate(vals):
        loops[f"disc{k}"] = conjugate_by_path(isolating_circle("mu", j, lam0, v), base)
    loops["lam"] = conjugate_by_path(isolating_circle("lambda", j, base[1], 0j), base)
    return loops
