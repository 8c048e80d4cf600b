"""Rank-4 Pfaffian connections of the period equations.

A system is stored in the theta frame: with phi = (1, thl, thm, thl^2)
applied to a period,

    thl phi = A phi,    thm phi = B phi.

The ordinary frame (d/dlam, d/dmu) has alpha = A/lam and beta = B/mu.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
import sympy

from .exactcore import (
    irreducible_factors,
    mat_add,
    mat_inverse,
    mat_is_zero,
    mat_map,
    mat_mul,
    partial,
    poly_ring,
    rf_field,
    solve_linear,
    theta,
)
from .periods import ThetaOperator, compose, operator

NAMES = ("lam", "mu")
K = rf_field(NAMES)
R = poly_ring(NAMES)
LAM, MU = K.gens

STANDARD = ((0, 0), (1, 0), (0, 1), (2, 0))
ALTERNATE = ((0, 0), (1, 0), (0, 1), (0, 2))
Matrix = list  # list of rows of field elements


@dataclass(frozen=True)
class PfaffianSystem:
    A: tuple  # 4x4, theta frame, lam direction
    B: tuple  # 4x4, theta frame, mu direction
    basis: tuple[tuple[int, int], ...] = STANDARD
    family: int | None = None

    @classmethod
    def make(cls, A, B, basis=STANDARD, family=None) -> "PfaffianSystem":
        conv = lambda x: x if hasattr(x, "numer") else K(x)
        return cls(tuple(tuple(conv(x) for x in r) for r in A),
                   tuple(tuple(conv(x) for x in r) for r in B), tuple(basis), family)

    @property
    def alpha(self) -> Matrix:
        """Ordinary-frame matrix for d/dlam."""
        return mat_map(lambda x: x / LAM, self.A)

    @property
    def beta(self) -> Matrix:
        return mat_map(lambda x: x / MU, self.B)


def _thl(x):
    return theta(x, "lam")


def _thm(x):
    return theta(x, "mu")


def integrability_residual(P: PfaffianSystem) -> Matrix:
    """thl B - thm A - (A B - B A); zero iff the system is integrable."""
    A, B = [list(r) for r in P.A], [list(r) for r in P.B]
    lhs = mat_add(mat_map(_thl, B), mat_map(_thm, A), -1)
    rhs = mat_add(mat_mul(A, B), mat_mul(B, A), -1)
    return mat_add(lhs, rhs, -1)


def integrability_residual_partial(alpha: Matrix, beta: Matrix) -> Matrix:
    """d_lam beta - d_mu alpha - (alpha beta - beta alpha)."""
    lhs = mat_add(mat_map(lambda x: partial(x, "lam"), beta), mat_map(lambda x: partial(x, "mu"), alpha), -1)
    rhs = mat_add(mat_mul(alpha, beta), mat_mul(beta, alpha), -1)
    return mat_add(lhs, rhs, -1)


def check_integrability(P: PfaffianSystem) -> bool:
    return mat_is_zero(integrability_residual_partial(P.alpha, P.beta))


# ---------------------------------------------------------------------------
# derivation from the two operators


def _op_rows(op: ThetaOperator) -> dict[tuple[int, int], object]:
    return {ab: _poly_to_field(p) for ab, p in op.coefficient_polys().items()}


def _poly_to_field(p) -> object:
    out = K.zero
    for (i, j), c in p.terms():
        out += K(c) * LAM**i * MU**j
    return out


class ReductionError(ValueError):
    """The relations do not close on the chosen four-element basis."""


@dataclass(frozen=True)
class Reducer:
    """Normal forms of theta monomials of order <= 3 modulo (D1, D3)."""

    basis: tuple[tuple[int, int], ...]
    table: dict  # monomial -> list of 4 coefficients

    def reduce(self, mono: tuple[int, int]) -> list:
        if mono in self.basis:
            return [K.one if b == mono else K.zero for b in self.basis]
        if mono not in self.table:
            raise ReductionError(f"monomial {mono} outside the reduction table")
        return self.table[mono]


def make_reducer(D1: ThetaOperator, D3: ThetaOperator, basis=STANDARD) -> Reducer:
    tl, tm = ThetaOperator.theta_lambda(), ThetaOperator.theta_mu()
    rels = [D1, D3, compose(tl, D1), compose(tm, D1), compose(tl, D3), compose(tm, D3)]
    monos = [(a, t - a) for t in range(4) for a in range(t, -1, -1)]
    for r in rels:
        for (_, _, a, b) in r.terms:
            if a + b > 3:
                raise ReductionError("operators must have theta-order at most 2")
    extra = [m for m in monos if m not in basis]
    rows = [_op_rows(r) for r in rels]
    N = [[row.get(m, K.zero) for m in extra] for row in rows]
    S = [[row.get(m, K.zero) for m in basis] for row in rows]
    cols = []
    for k in range(len(basis)):
        sol = solve_linear(N, [-S[i][k] for i in range(len(rels))])
        if not sol.consistent or sol.nullspace:
            raise ReductionError("relations do not determine the non-basis monomials")
        cols.append(sol.particular)
    table = {m: [cols[k][i] for k in range(len(basis))] for i, m in enumerate(extra)}
    return Reducer(tuple(basis), table)


def _connection(red: Reducer) -> tuple[Matrix, Matrix]:
    A = [red.reduce((a + 1, b)) for a, b in red.basis]
    B = [red.reduce((a, b + 1)) for a, b in red.basis]
    return A, B


def derive_pfaffian(D1: ThetaOperator, D3: ThetaOperator, family: int | None = None,
                    basis=STANDARD) -> PfaffianSystem:
    A, B = _connection(make_reducer(D1, D3, basis))
    return PfaffianSystem.make(A, B, basis, family)


def derived_system(j: int, basis=STANDARD) -> PfaffianSystem:
    return derive_pfaffian(operator(j, "D1"), operator(j, "D3"), j, basis)


# ---------------------------------------------------------------------------
# printed data


@lru_cache(maxsize=None)
def _raw() -> dict:
    return json.loads(resources.files("k3lab").joinpath("data/pfaffian_printed.json").read_text())


_SYMS = {n: sympy.Symbol(n) for n in NAMES}


def _eval(text: str, env: dict, allow: tuple[str, ...] = ()):
    """sympy expression, or a string explaining why the text is unreadable."""
    src = text.replace("^", "**")
    try:
        expr = sympy.sympify(src, locals={**_SYMS, **env}, rational=True)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        return f"unparseable: {type(exc).__name__}"
    free = {str(s) for s in expr.free_symbols} - set(NAMES) - set(allow)
    if free:
        return f"undefined symbols {sorted(free)}"
    return expr


@dataclass(frozen=True)
class PrintedPfaffian:
    family: int
    A: tuple  # entries: field element or None
    B: tuple
    problems: dict = field(default_factory=dict)  # "A[i][j]" or symbol -> reason

    def entry(self, which: str, i: int, j: int):
        return (self.A if which == "A" else self.B)[i][j]


LEVELS = ("literal", "read", "corrected")


def _symbol_texts(data: dict, level: str, skip: str | None = None) -> dict:
    """Symbol -> text at the requested level (None when never defined)."""
    out = {}
    for name, text in data["symbols"].items():
        if level != "literal" and name in data.get("readings", {}) and name != skip:
            text = data["readings"][name]["text"]
        if level == "corrected" and name in data.get("corrections", {}):
            text = data["corrections"][name]["text"]
        out[name] = text
    return out


def printed_pfaffian(j: int, level: str = "read") -> PrintedPfaffian:
    """Transcribed matrices.

    ``literal`` parses the printed text as is.  ``read`` adds the recorded
    readings (balanced parentheses, mislabelled or undefined symbols) that no
    printed value contradicts.  ``corrected`` also applies the corrections to
    entries whose printed value is wrong.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    data = _raw()[str(j)]
    env: dict = {}
    problems: dict = {}
    for name, text in _symbol_texts(data, level).items():
        v = "never defined" if text is None else _eval(text, env)
        if isinstance(v, str):
            problems[name] = v
            env[name] = sympy.Symbol(name)  # keeps dependants flagged
        else:
            env[name] = v
    mats = []
    for key, label in (("alpha", "A"), ("beta", "B")):
        M = []
        for r, row in enumerate(data[key]):
            out = []
            for c, text in enumerate(row):
                tag = f"{label}[{r}][{c}]"
                ent = data.get("entry_readings", {}).get(f"{key}[{r}][{c}]")
                if level != "literal" and ent:
                    text = ent["text"]
                v = _eval(text, env)
                if isinstance(v, str):
                    problems[tag] = v
                    out.append(None)
                else:
                    out.append(K.from_expr(v))
            M.append(tuple(out))
        mats.append(tuple(M))
    return PrintedPfaffian(j, mats[0], mats[1], problems)


def repairs(j: int, kind: str = "readings") -> dict[str, str]:
    """Recorded ``readings`` or ``corrections`` for family ``j``: target -> reason."""
    data = _raw()[str(j)]
    if kind == "corrections":
        return {k: v["reason"] for k, v in data.get("corrections", {}).items()}
    out = {k: v["reason"] for k, v in data.get("readings", {}).items()}
    out.update({k: v["reason"] for k, v in data.get("entry_readings", {}).items()})
    return out


def _as_system(pr: PrintedPfaffian) -> PfaffianSystem:
    if pr.problems:
        raise ValueError(f"family {pr.family}: unreadable entries {sorted(pr.problems)}")
    return PfaffianSystem.make(pr.A, pr.B, STANDARD, pr.family)


def pfaffian_data(j: int) -> PfaffianSystem:
    """Printed system with the recorded readings; printed values kept even
    where they are wrong."""
    if j not in (0, 1, 2, 3):
        raise KeyError(f"unknown family {j!r}")
    return _as_system(printed_pfaffian(j, "read"))


def corrected_pfaffian(j: int) -> PfaffianSystem:
    if j not in (0, 1, 2, 3):
        raise KeyError(f"unknown family {j!r}")
    return _as_system(printed_pfaffian(j, "corrected"))


@dataclass(frozen=True)
class EntryReport:
    matrix: str
    row: int
    col: int
    status: str  # "match", "mismatch" or "missing"
    printed: object
    derived: object

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix,
            "row": self.row + 1,
            "col": self.col + 1,
            "status": self.status,
            "printed": None if self.printed is None else str(self.printed.as_expr()),
            "derived": str(self.derived.as_expr()),
        }


def compare_entries(printed: PrintedPfaffian, derived: PfaffianSystem) -> list[EntryReport]:
    out = []
    for label, pm, dm in (("A", printed.A, derived.A), ("B", printed.B, derived.B)):
        for i in range(4):
            for k in range(4):
                p, d = pm[i][k], dm[i][k]
                status = "missing" if p is None else ("match" if p == d else "mismatch")
                out.append(EntryReport(label, i, k, status, p, d))
    return out


def solve_missing_symbol(j: int, symbol: str) -> object | None:
    """Value of an undefined symbol forced by matching the derived system.

    Each printed entry that uses ``symbol`` is linear in it; the value must be
    the same for all such entries, else None.
    """
    data = _raw()[str(j)]
    pr = printed_pfaffian(j, "literal")
    der = derived_system(j)
    env: dict = {}
    for name, text in _symbol_texts(data, "read", skip=symbol).items():
        v = None if text is None else _eval(text, env, (symbol,))
        if isinstance(v, sympy.Expr):
            env[name] = v
    r = sympy.Symbol(symbol)
    found = None
    for key, label, dm in (("alpha", "A", der.A), ("beta", "B", der.B)):
        for i, row in enumerate(data[key]):
            for k, text in enumerate(row):
                if f"{label}[{i}][{k}]" not in pr.problems:
                    continue
                expr = _eval(text, env, (symbol,))
                if isinstance(expr, str) or r not in expr.free_symbols:
                    continue
                sol = sympy.solve(sympy.Eq(expr, dm[i][k].as_expr()), r)
                if len(sol) != 1:
                    return None
                val = K.from_expr(sympy.together(sol[0]))
                if found is not None and found != val:
                    return None
                found = val
    return found


# ---------------------------------------------------------------------------
# gauge changes and singular loci


def gauge(P: PfaffianSystem, G: Matrix, new_basis) -> PfaffianSystem:
    """System for psi = G phi: thl psi = (thl G + G A) G^-1 psi."""
    Gi = mat_inverse([list(r) for r in G])
    A = mat_mul(mat_add(mat_map(_thl, G), mat_mul(G, [list(r) for r in P.A])), Gi)
    B = mat_mul(mat_add(mat_map(_thm, G), mat_mul(G, [list(r) for r in P.B])), Gi)
    return PfaffianSystem.make(A, B, new_basis, P.family)


def to_alternate_basis(P: PfaffianSystem) -> PfaffianSystem:
    """Rewrite in psi = (1, thl, thm, thm^2); thm^2 is row 3 of B."""
    if P.basis != STANDARD:
        raise ValueError("expected the standard basis")
    e = lambda k: [K.one if i == k else K.zero for i in range(4)]
    G = [e(0), e(1), e(2), list(P.B[2])]
    return gauge(P, G, ALTERNATE)


def denominator_factors(P: PfaffianSystem) -> set:
    """Monic irreducible factors of all ordinary-frame denominators."""
    out = set()
    for M in (P.alpha, P.beta):
        for row in M:
            for x in row:
                for f, _ in irreducible_factors(x.denom):
                    if f.degree(0) > 0 or f.degree(1) > 0:
                        out.add(_normalize(f))
    return out


def _normalize(f):
    return f.monic()


@dataclass(frozen=True)
class SingularLocus:
    factors: tuple  # (polynomial, apparent flag)

    @property
    def true_factors(self) -> list:
        return [f for f, app in self.factors if not app]

    @property
    def apparent_factors(self) -> list:
        return [f for f, app in self.factors if app]


def singular_locus_from(P: PfaffianSystem) -> SingularLocus:
    """Denominator factors, flagging those that vanish after the gauge change."""
    here = denominator_factors(P)
    if not here:
        return SingularLocus(())
    there = denominator_factors(to_alternate_basis(P))
    facs = sorted(here, key=lambda f: (sum(f.degrees()), str(f)))
    return SingularLocus(tuple((f, f not in there) for f in facs))


def matches_parameter_locus(L: SingularLocus, j: int) -> bool:
    """True factors equal the factors cutting out the complement of the
    family's parameter domain."""
    from .fibrations import singular_locus

    return set(L.true_factors) == {_normalize(f) for f in singular_locus(j)}
