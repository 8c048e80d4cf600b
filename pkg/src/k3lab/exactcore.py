"""Exact arithmetic substrate.

Multivariate polynomials and rational functions over Q are sympy sparse ring
and field elements (``PolyElement`` / ``FracElement``).  The field keeps every
fraction coprime with integer content pulled out and a positive leading
denominator coefficient, so structural equality is mathematical equality.

On top of that this module adds what sympy does not give in the shape we need:
rational substitution between fields, truncated bivariate series with tracked
validity, fraction-free linear algebra and JSON serialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, Iterable, Mapping, Sequence

import sympy
from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, field as _sym_field
from sympy.polys.rings import PolyElement, ring as _sym_ring

Rational = Fraction

# Spellings accepted in transcribed formulas.
ALIASES = {"λ": "lam", "μ": "mu", "lambda": "lam"}


# ---------------------------------------------------------------------------
# rings and fields


@lru_cache(maxsize=None)
def poly_ring(names: tuple[str, ...]):
    """Polynomial ring Q[names]; cached so equal name tuples share one ring."""
    R, *_ = _sym_ring(",".join(names), QQ)
    return R


@lru_cache(maxsize=None)
def rf_field(names: tuple[str, ...]):
    """Rational-function field Q(names)."""
    K, *_ = _sym_field(",".join(names), QQ)
    return K


def var_names(f) -> tuple[str, ...]:
    if isinstance(f, PolyElement):
        return tuple(str(s) for s in f.ring.symbols)
    if isinstance(f, FracElement):
        return tuple(str(s) for s in f.field.symbols)
    raise TypeError(f"not a polynomial or rational function: {type(f).__name__}")


def gens(K) -> dict[str, object]:
    """Generators of a ring or field keyed by name."""
    return {str(s): g for s, g in zip(K.symbols, K.gens)}


def _to_qq(c) -> object:
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ.convert(c)


def to_fraction(c) -> Fraction:
    """Convert a sympy QQ / int / Fraction scalar to ``Fraction``."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    return Fraction(int(c.numerator), int(c.denominator))


def parse(text: str, names: Sequence[str]):
    """Parse a formula into Q(names).

    Accepts ``^`` for powers and the spellings ``λ``/``μ`` for ``lam``/``mu``.
    """
    names = tuple(names)
    K = rf_field(names)
    src = text.replace("^", "**")
    for a, b in ALIASES.items():
        src = src.replace(a, b)
    syms = {n: sympy.Symbol(n) for n in names}
    expr = sympy.sympify(src, locals=syms, rational=True)
    unknown = {str(s) for s in expr.free_symbols} - set(names)
    if unknown:
        raise ValueError(f"unbound symbols in formula: {sorted(unknown)}")
    return K.from_expr(expr)


def parse_poly(text: str, names: Sequence[str]) -> PolyElement:
    return as_poly(parse(text, names))


def to_field(f, K):
    """Coerce a scalar, polynomial or rational function into field ``K``.

    Variables are matched by name; every variable of ``f`` must exist in ``K``.
    """
    if isinstance(f, (int, Fraction)) or (not isinstance(f, (PolyElement, FracElement))):
        return K(_to_qq(f))
    if isinstance(f, FracElement) and f.field == K:
        return f
    target = gens(K)
    missing = [n for n in var_names(f) if n not in target]
    if missing:
        raise ValueError(f"variables {missing} not present in target field")
    return substitute(f, {}, K)


def _eval_poly(p: PolyElement, images: Sequence, K):
    """Evaluate polynomial ``p`` at field elements ``images`` (one per generator)."""
    cache: dict[tuple[int, int], object] = {}

    def power(i: int, e: int):
        key = (i, e)
        if key not in cache:
            if e == 0:
                cache[key] = K.one
            elif e == 1:
                cache[key] = images[i]
            else:
                half = power(i, e // 2)
                sq = half * half
                cache[key] = sq * images[i] if e % 2 else sq
        return cache[key]

    acc = K.zero
    for monom, coeff in p.terms():
        term = K(coeff)
        for i, e in enumerate(monom):
            if e:
                term = term * power(i, e)
        acc = acc + term
    return acc


def substitute(f, bindings: Mapping[str, object], K=None):
    """Compose ``f`` with ``bindings`` (variable name -> expression).

    Unbound variables map to the same-named generator of the target field.
    The target field defaults to the field of the first binding, else the
    field of ``f``.
    """
    names = var_names(f)
    if K is None:
        K = None
        for v in bindings.values():
            if isinstance(v, FracElement):
                K = v.field
                break
        if K is None:
            K = rf_field(names)
    target = gens(K)
    images = []
    for n in names:
        if n in bindings:
            images.append(to_field(bindings[n], K))
        elif n in target:
            images.append(target[n])
        else:
            raise ValueError(f"variable {n!r} is unbound and absent from target field")
    if isinstance(f, PolyElement):
        return _eval_poly(f, images, K)
    num = _eval_poly(f.numer, images, K)
    den = _eval_poly(f.denom, images, K)
    if den == 0:
        raise ZeroDivisionError("substitution makes the denominator vanish identically")
    return num / den


def rf_normalize(num, den):
    """Return ``num/den`` as a canonical rational function."""
    if den == 0:
        raise ZeroDivisionError("zero denominator")
    if isinstance(num, PolyElement) and isinstance(den, PolyElement):
        names = var_names(num) if num.ring == den.ring else None
        if names is None:
            raise ValueError("numerator and denominator live in different rings")
        K = rf_field(names)
        return to_field(num, K) / to_field(den, K)
    return num / den


def _gen(f, var: str):
    g = gens(f.ring if isinstance(f, PolyElement) else f.field)
    if var not in g:
        raise KeyError(f"unknown variable {var!r}")
    return g[var]


def partial(f, var: str):
    """Exact partial derivative (quotient rule for rational functions)."""
    return f.diff(_gen(f, var))


def theta(f, var: str):
    """Euler derivative ``var * d/dvar``."""
    return _gen(f, var) * partial(f, var)


def irreducible_factors(p: PolyElement) -> list[tuple[PolyElement, int]]:
    """Irreducible factors over Q with multiplicities (content dropped)."""
    _, facs = p.factor_list()
    return [(q, e) for q, e in facs]


def squarefree_factors(p: PolyElement) -> list[tuple[PolyElement, int]]:
    _, facs = p.sqf_list()
    return [(q, e) for q, e in facs]


def is_polynomial(f) -> bool:
    return isinstance(f, PolyElement) or f.denom.is_ground


def as_poly(f) -> PolyElement:
    """Rational function with constant denominator -> polynomial."""
    if isinstance(f, PolyElement):
        return f
    if not f.denom.is_ground:
        raise ValueError("not a polynomial")
    return f.numer.quo_ground(f.denom.LC)


# ---------------------------------------------------------------------------
# bivariate truncated series


@dataclass(frozen=True)
class BiSeries:
    """Truncated series sum c[n,m] lam^n mu^m, known for n+m <= order."""

    order: int
    coeffs: Mapping[tuple[int, int], Fraction] = dc_field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (n, m), c in self.coeffs.items():
            if n < 0 or m < 0:
                raise ValueError("negative exponent in series")
            if n + m <= self.order and c != 0:
                clean[(n, m)] = Fraction(c)
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_rule(cls, rule: Callable[[int, int], Fraction], order: int) -> "BiSeries":
        return cls(order, {(n, d - n): rule(n, d - n) for d in range(order + 1) for n in range(d + 1)})

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        n, m = key
        if n + m > self.order:
            raise IndexError(f"coefficient ({n},{m}) beyond valid order {self.order}")
        return self.coeffs.get((n, m), Fraction(0))

    def indices(self) -> Iterable[tuple[int, int]]:
        for d in range(self.order + 1):
            for n in range(d + 1):
                yield (n, d - n)

    def truncate(self, order: int) -> "BiSeries":
        return BiSeries(min(order, self.order), self.coeffs)

    def __add__(self, other: "BiSeries") -> "BiSeries":
        order = min(self.order, other.order)
        keys = set(self.coeffs) | set(other.coeffs)
        return BiSeries(order, {k: self.coeffs.get(k, 0) + other.coeffs.get(k, 0) for k in keys})

    def __neg__(self) -> "BiSeries":
        return BiSeries(self.order, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "BiSeries") -> "BiSeries":
        return self + (-other)

    def scale(self, c) -> "BiSeries":
        c = Fraction(c)
        return BiSeries(self.order, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other: "BiSeries") -> "BiSeries":
        order = min(self.order, other.order)
        out: dict[tuple[int, int], Fraction] = {}
        for (a, b), u in self.coeffs.items():
            for (c, d), v in other.coeffs.items():
                if a + b + c + d <= order:
                    k = (a + c, b + d)
                    out[k] = out.get(k, 0) + u * v
        return BiSeries(order, out)

    def theta_lambda(self) -> "BiSeries":
        return BiSeries(self.order, {(n, m): n * c for (n, m), c in self.coeffs.items()})

    def theta_mu(self) -> "BiSeries":
        return BiSeries(self.order, {(n, m): m * c for (n, m), c in self.coeffs.items()})

    def shift(self, i: int, j: int) -> "BiSeries":
        """Multiply by lam^i mu^j; validity drops by i+j (conservative)."""
        order = self.order - (i + j)
        return BiSeries(max(order, -1), {(n + i, m + j): c for (n, m), c in self.coeffs.items()})

    def is_zero(self) -> bool:
        return not self.coeffs

    def nonzero_indices(self) -> list[tuple[int, int]]:
        return sorted(self.coeffs)


# ---------------------------------------------------------------------------
# linear algebra


def _is_rf(x) -> bool:
    return isinstance(x, (FracElement, PolyElement))


@dataclass(frozen=True)
class LinearSolution:
    """Solution set x_particular + span(nullspace); particular is None if inconsistent."""

    particular: list | None
    nullspace: list[list]

    @property
    def consistent(self) -> bool:
        return self.particular is not None


def _bareiss_forward(M: list[list], exact_div: Callable, ncols: int):
    """Fraction-free row echelon in place; returns pivot (row, col) list."""
    nrows = len(M)
    pivots: list[tuple[int, int]] = []
    prev = None
    r = 0
    for c in range(ncols):
        if r >= nrows:
            break
        p = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        for i in range(r + 1, nrows):
            a = M[i][c]
            row_i = M[i]
            row_r = M[r]
            for j in range(c, len(row_i)):
                v = piv * row_i[j] - a * row_r[j]
                row_i[j] = exact_div(v, prev) if prev is not None else v
        # rows above the current pivot row that already finished keep their values
        prev = piv
        pivots.append((r, c))
        r += 1
    return pivots


def _integral_rows(rows: list[list]):
    """Scale each row to integer / polynomial entries; return rows, div, to_field."""
    flat = [x for row in rows for x in row]
    K = next((x.field if isinstance(x, FracElement) else None for x in flat if isinstance(x, FracElement)), None)
    if K is None:
        poly = next((x for x in flat if isinstance(x, PolyElement)), None)
        if poly is not None:
            K = rf_field(var_names(poly))
    if K is None:
        out = []
        for row in rows:
            fr = [Fraction(x) for x in row]
            L = lcm(*(x.denominator for x in fr)) if fr else 1
            out.append([int(x * L) for x in fr])

        def div(a, b):
            q, rem = divmod(a, b)
            if rem:
                raise ArithmeticError("inexact division in Bareiss step")
            return q

        return out, div, Fraction
    out = []
    for row in rows:
        fr = [to_field(x, K) for x in row]
        L = K.ring.one
        for x in fr:
            if x != 0:
                L = L.lcm(x.denom)
        out.append([as_poly(x * L) if x != 0 else K.ring.zero for x in fr])

    def pdiv(a, b):
        return a.exquo(b)

    def lift(p):
        return K(p)

    return out, pdiv, lift


def bareiss_det(M: Sequence[Sequence]):
    """Determinant by fraction-free elimination (ints, Fractions or polynomials)."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    flat = [x for row in M for x in row]
    if any(isinstance(x, FracElement) for x in flat):
        K = next(x.field for x in flat if isinstance(x, FracElement))
        rows = [[to_field(x, K) for x in row] for row in M]
        dens = K.one
        scaled = []
        for row in rows:
            L = K.ring.one
            for x in row:
                if x != 0:
                    L = L.lcm(x.denom)
            dens = dens * K(L)
            scaled.append([as_poly(x * L) for x in row])
        return K(bareiss_det(scaled)) / dens
    if any(isinstance(x, PolyElement) for x in flat):
        R = next(x.ring for x in flat if isinstance(x, PolyElement))
        A = [[x if isinstance(x, PolyElement) else R(_to_qq(x)) for x in row] for row in M]
        zero = R.zero

        def div(a, b):
            return a.exquo(b)
    else:
        fr = [[Fraction(x) for x in row] for row in M]
        scale = Fraction(1)
        A = []
        for row in fr:
            L = lcm(*(x.denominator for x in row))
            scale *= L
            A.append([int(x * L) for x in row])
        if scale != 1:
            return Fraction(bareiss_det(A)) / scale
        zero = 0

        def div(a, b):
            q, rem = divmod(a, b)
            assert rem == 0
            return q

    sign = 1
    prev = None
    for k in range(n - 1):
        if A[k][k] == zero:
            p = next((i for i in range(k + 1, n) if A[i][k] != zero), None)
            if p is None:
                return zero
            A[k], A[p] = A[p], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                v = A[k][k] * A[i][j] - A[i][k] * A[k][j]
                A[i][j] = div(v, prev) if prev is not None else v
        prev = A[k][k]
    return A[n - 1][n - 1] * sign


def solve_linear(A: Sequence[Sequence], b: Sequence | None = None) -> LinearSolution:
    """Solve A x = b exactly (b defaults to zero).

    Entries may be ints/Fractions or rational functions.  Elimination is
    fraction-free on row-scaled integral entries; back substitution happens in
    the field.
    """
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    if b is None:
        b = [0] * nrows
    if len(b) != nrows:
        raise ValueError("dimension mismatch between A and b")
    rows = [list(A[i]) + [b[i]] for i in range(nrows)]
    if nrows == 0:
        return LinearSolution([Fraction(0)] * ncols, [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)])
    M, div, lift = _integral_rows(rows)
    pivots = _bareiss_forward(M, div, ncols)
    rank_ = len(pivots)
    zero_like = lift(0)
    for i in range(rank_, nrows):
        if M[i][ncols] != 0:
            return LinearSolution(None, _nullspace_from(M, pivots, ncols, lift))
    x = [zero_like] * ncols
    for r, c in reversed(pivots):
        acc = lift(M[r][ncols])
        for j in range(c + 1, ncols):
            if x[j] != 0 and M[r][j] != 0:
                acc = acc - lift(M[r][j]) * x[j]
        x[c] = acc / lift(M[r][c])
    return LinearSolution(x, _nullspace_from(M, pivots, ncols, lift))


def _nullspace_from(M, pivots, ncols, lift) -> list[list]:
    pivot_cols = {c for _, c in pivots}
    basis = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        x = [lift(0)] * ncols
        x[free] = lift(1)
        for r, c in reversed(pivots):
            acc = lift(0)
            for j in range(c + 1, ncols):
                if x[j] != 0 and M[r][j] != 0:
                    acc = acc - lift(M[r][j]) * x[j]
            x[c] = acc / lift(M[r][c])
        basis.append(x)
    return basis


def nullspace(A: Sequence[Sequence]) -> list[list]:
    return solve_linear(A).nullspace


def rank(A: Sequence[Sequence]) -> int:
    if not A:
        return 0
    ncols = len(A[0])
    return ncols - len(nullspace(A))


def mat_mul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list[list]:
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = 0
            for t in range(k):
                a = A[i][t]
                if a != 0:
                    bt = B[t][j]
                    if bt != 0:
                        acc = a * bt + acc
            row.append(acc)
        out.append(row)
    return out


def mat_add(A, B, sign: int = 1) -> list[list]:
    return [[a + sign * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_map(fn: Callable, A) -> list[list]:
    return [[fn(x) for x in row] for row in A]


def mat_transpose(A) -> list[list]:
    return [list(col) for col in zip(*A)]


def mat_is_zero(A) -> bool:
    return all(x == 0 for row in A for x in row)


def identity(n: int, one=1) -> list[list]:
    return [[one if i == j else 0 * one for j in range(n)] for i in range(n)]


def mat_inverse(A) -> list[list]:
    """Exact inverse by solving A X = I column by column."""
    n = len(A)
    cols = []
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        sol = solve_linear(A, e)
        if not sol.consistent or sol.nullspace:
            raise ZeroDivisionError("singular matrix")
        cols.append(sol.particular)
    return mat_transpose(cols)


# ---------------------------------------------------------------------------
# serialization


def rational_to_str(q) -> str:
    q = to_fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den or 1))


def poly_to_json(p: PolyElement) -> dict:
    terms = sorted(p.terms())
    return {
        "variables": list(var_names(p)),
        "terms": [[list(mon), rational_to_str(c)] for mon, c in terms],
    }


def poly_from_json(data: Mapping) -> PolyElement:
    R = poly_ring(tuple(data["variables"]))
    out = R.zero
    for mon, c in data["terms"]:
        out += R({tuple(mon): _to_qq(rational_from_str(c))})
    return out


def rf_to_json(f) -> dict:
    f = f if isinstance(f, FracElement) else to_field(f, rf_field(var_names(f)))
    return {"num": poly_to_json(f.numer), "den": poly_to_json(f.denom)}


def rf_from_json(data: Mapping):
    num = poly_from_json(data["num"])
    den = poly_from_json(data["den"])
    return rf_normalize(num, den)


def to_text(f) -> str:
    """Human-readable canonical text (sympy printing of the normal form)."""
    if isinstance(f, (PolyElement, FracElement)):
        return str(f.as_expr())
    if isinstance(f, Fraction):
        return rational_to_str(f)
    return str(f)
