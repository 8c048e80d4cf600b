"""Lattice polytopes, their anticanonical Laurent families and GKZ matrices."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

Vec = tuple[int, ...]

# Vertices listed as the columns of the printed matrices.
POLYTOPE_VERTICES: dict[int, tuple[Vec, ...]] = {
    0: ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, -1), (-1, -1, -2)),
    1: ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, 0, -1), (0, -1, -1)),
    2: ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0, -1, -1), (-1, -1, -1)),
    3: ((1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, 0), (0, 0, -1)),
    4: ((1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, -1), (-1, -1, -1)),
}

FANO_EXPECTED = frozenset({0, 2, 3, 4})


def _sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _cross(a: Vec, b: Vec) -> Vec:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def det3(a: Vec, b: Vec, c: Vec) -> int:
    return _dot(a, _cross(b, c))


@dataclass(frozen=True)
class Facet:
    normal: Vec  # primitive integer normal, outward
    rhs: int  # normal . x <= rhs on the polytope
    vertices: tuple[int, ...]  # indices into the polytope's vertex list


@dataclass(frozen=True)
class LatticePolytope:
    vertices: tuple[Vec, ...]

    def __post_init__(self):
        verts = tuple(tuple(int(c) for c in v) for v in self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("repeated vertex")
        if any(len(v) != 3 for v in verts):
            raise ValueError("vertices must be 3-vectors")
        base = verts[0]
        diffs = [_sub(v, base) for v in verts[1:]]
        if not any(det3(a, b, c) != 0 for a, b, c in itertools.combinations(diffs, 3)):
            raise ValueError("vertices do not span R^3")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def from_json(cls, text: str) -> "LatticePolytope":
        return cls(tuple(tuple(v) for v in json.loads(text)))


def polytope(j: int) -> LatticePolytope:
    if j not in POLYTOPE_VERTICES:
        raise KeyError(f"unknown polytope P{j}")
    return LatticePolytope(POLYTOPE_VERTICES[j])


def facets(P: LatticePolytope) -> list[Facet]:
    """Facets found by testing every vertex triple for a supporting plane."""
    V = P.vertices
    found: dict[tuple[Vec, int], Facet] = {}
    for i, j, k in itertools.combinations(range(len(V)), 3):
        n = _cross(_sub(V[j], V[i]), _sub(V[k], V[i]))
        if n == (0, 0, 0):
            continue
        g = gcd(*n)
        n = tuple(c // g for c in n)
        h = _dot(n, V[i])
        vals = [_dot(n, v) for v in V]
        if all(x <= h for x in vals):
            pass
        elif all(x >= h for x in vals):
            n, h, vals = tuple(-c for c in n), -h, [-x for x in vals]
        else:
            continue
        on = tuple(idx for idx, x in enumerate(vals) if x == h)
        found[(n, h)] = Facet(n, h, on)
    return sorted(found.values(), key=lambda f: (f.vertices, f.normal))


def contains(P: LatticePolytope, x: Sequence[int], fs: list[Facet] | None = None) -> bool:
    fs = facets(P) if fs is None else fs
    return all(_dot(f.normal, x) <= f.rhs for f in fs)


def lattice_points(P: LatticePolytope) -> list[Vec]:
    """All integer points of the convex hull (bounding-box scan)."""
    fs = facets(P)
    lo = [min(v[i] for v in P.vertices) for i in range(3)]
    hi = [max(v[i] for v in P.vertices) for i in range(3)]
    pts = [
        p
        for p in itertools.product(*(range(lo[i], hi[i] + 1) for i in range(3)))
        if contains(P, p, fs)
    ]
    return sorted(pts)


def interior_points(P: LatticePolytope) -> list[Vec]:
    fs = facets(P)
    return [p for p in lattice_points(P) if all(_dot(f.normal, p) < f.rhs for f in fs)]


def is_reflexive_terminal(P: LatticePolytope) -> bool:
    """Origin is the only interior point, boundary points are the vertices,
    and every facet reads a.x <= 1 with integral a."""
    fs = facets(P)
    if any(f.rhs <= 0 or any(c % f.rhs for c in f.normal) for f in fs):
        return False
    if interior_points(P) != [(0, 0, 0)]:
        return False
    boundary = set(lattice_points(P)) - {(0, 0, 0)}
    return boundary == set(P.vertices)


def is_fano(P: LatticePolytope) -> bool:
    """Every facet is a triangle whose vertex determinant is +-1."""
    if not is_reflexive_terminal(P):
        return False
    for f in facets(P):
        if len(f.vertices) != 3:
            return False
        a, b, c = (P.vertices[i] for i in f.vertices)
        if abs(det3(a, b, c)) != 1:
            return False
    return True


@dataclass(frozen=True)
class LaurentFamily:
    monomials: tuple[Vec, ...]
    coefficients: tuple[str, ...]

    def text(self) -> str:
        parts = []
        for name, mon in zip(self.coefficients, self.monomials):
            num = "*".join(f"t{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mon) if e > 0)
            den = "*".join(f"t{i + 1}" + (f"^{-e}" if e < -1 else "") for i, e in enumerate(mon) if e < 0)
            term = name + (f"*{num}" if num else "") + (f"/({den})" if den else "")
            parts.append(term)
        return " + ".join(parts)


def anticanonical_family(P: LatticePolytope) -> LaurentFamily:
    """Constant term first, then the vertices in column order, then any
    remaining lattice points sorted."""
    pts = lattice_points(P)
    rest = sorted(p for p in pts if p != (0, 0, 0) and p not in P.vertices)
    mons = ((0, 0, 0),) + P.vertices + tuple(rest)
    return LaurentFamily(mons, tuple(f"a{i + 1}" for i in range(len(mons))))


@dataclass(frozen=True)
class GkzData:
    A: tuple[tuple[int, ...], ...]
    beta: tuple[int, ...] = (-1, 0, 0, 0)

    @property
    def ncols(self) -> int:
        return len(self.A[0])


def gkz_matrix(P: LatticePolytope) -> GkzData:
    fam = anticanonical_family(P)
    cols = [(1,) + m for m in fam.monomials]
    A = tuple(tuple(c[r] for c in cols) for r in range(4))
    return GkzData(A)


# ---------------------------------------------------------------------------
# integer kernel


def integer_kernel(A: Sequence[Sequence[int]]) -> list[list[int]]:
    """Z-basis of {u in Z^k : A u = 0} via unimodular column reduction."""
    m, k = len(A), len(A[0])
    M = [list(map(int, row)) for row in A]
    U = [[int(i == j) for j in range(k)] for i in range(k)]  # columns track ops

    def colop(dst: int, src: int, c: int):
        for row in M:
            row[dst] += c * row[src]
        for row in U:
            row[dst] += c * row[src]

    def swap(a: int, b: int):
        for row in M:
            row[a], row[b] = row[b], row[a]
        for row in U:
            row[a], row[b] = row[b], row[a]

    col = 0
    for r in range(m):
        if col >= k:
            break
        while True:
            nz = [c for c in range(col, k) if M[r][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda c: abs(M[r][c]))
            swap(col, piv)
            done = True
            for c in range(col + 1, k):
                if M[r][c]:
                    colop(c, col, -(M[r][c] // M[r][col]))
                    if M[r][c]:
                        done = False
            if done:
                break
        if any(M[r][c] for c in range(col, k)):
            col += 1
    basis = [[U[i][c] for i in range(k)] for c in range(col, k)]
    return reduce_basis(basis)


def reduce_basis(basis: list[list[int]]) -> list[list[int]]:
    """Pairwise exchange reduction: replace b_i by b_i - r b_j while the
    Euclidean norm drops.  Terminates because norms strictly decrease."""
    B = [list(v) for v in basis]
    changed = True
    while changed:
        changed = False
        B.sort(key=lambda v: (_dot(v, v), v))
        for i in range(len(B)):
            for j in range(len(B)):
                if i == j:
                    continue
                nj = _dot(B[j], B[j])
                r = round(Fraction(_dot(B[i], B[j]), nj))
                if r:
                    cand = [a - r * b for a, b in zip(B[i], B[j])]
                    if _dot(cand, cand) < _dot(B[i], B[i]):
                        B[i] = cand
                        changed = True
    for v in B:  # sign: first nonzero entry negative, matching d1^k on one side
        first = next(x for x in v if x)
        if first > 0:
            v[:] = [-x for x in v]
    B.sort(key=lambda v: (_dot(v, v), v))
    return B


def mori_generators(g: GkzData) -> list[list[int]]:
    """Primitive generators of the cone of kernel vectors u with u_i >= 0
    for every non-constant column i (the exponents of the torus-invariant
    coordinates)."""
    K = integer_kernel(g.A)
    if len(K) != 2:
        raise ValueError("expected a rank-2 kernel")
    k1, k2 = K
    ineqs = [(k1[i], k2[i]) for i in range(1, g.ncols)]
    rays = set()
    for a, b in ineqs:
        for d in ((-b, a), (b, -a)):
            if d == (0, 0):
                continue
            if all(p * d[0] + q * d[1] >= 0 for p, q in ineqs):
                gg = gcd(*d)
                rays.add((d[0] // gg, d[1] // gg))
    out = sorted([[p * x + q * y for x, y in zip(k1, k2)] for p, q in rays])
    if len(out) != 2:
        raise ValueError("cone is not two-dimensional and strongly convex")
    return out


def lattice_index(vectors: list[list[int]], basis: list[list[int]]) -> int:
    """|det| of ``vectors`` expressed in the lattice ``basis`` (both rank 2)."""
    from .exactcore import solve_linear

    cols = [[basis[0][i], basis[1][i]] for i in range(len(basis[0]))]
    coords = []
    for v in vectors:
        sol = solve_linear(cols, v)
        coords.append(sol.particular)
    d = coords[0][0] * coords[1][1] - coords[0][1] * coords[1][0]
    return abs(int(d))
