import random
from fractions import Fraction

import pytest

from k3lab.exactcore import (
    BiSeries,
    bareiss_det,
    gens,
    mat_mul,
    nullspace,
    parse,
    parse_poly,
    partial,
    poly_ring,
    rank,
    rf_field,
    rf_normalize,
    rf_from_json,
    rf_to_json,
    solve_linear,
    substitute,
    theta,
)

LM = ("lam", "mu")
XY = ("x", "y")
K = rf_field(LM)
R = poly_ring(LM)
lam, mu = R.gens


def test_normalize_cancels_constant():
    assert rf_normalize(2 * lam, 4 * mu) == parse("lam/(2*mu)", LM)


def test_normalize_cancels_common_factor():
    f = rf_normalize(lam**2 - lam, lam)
    assert f == parse("lam - 1", LM)
    assert f.denom == 1


def test_normalize_keeps_coprime_polynomial():
    t = parse_poly("lam^2*(4*lam-1)^3 - 2*(2+25*lam*(20*lam-1))*mu - 3125*mu^2", LM)
    f = rf_normalize(t, R.one)
    assert f.numer == t and f.denom == 1


def test_normalize_idempotent():
    f = rf_normalize(6 * lam * mu + 3 * mu, 9 * mu**2)
    assert rf_normalize(f.numer, f.denom) == f


def test_substitute_inverse_map_into_lambda():
    lam_xy = parse("1/4 - y/(20*x^2)", XY)
    out = substitute(parse("lam", LM), {"lam": lam_xy, "mu": parse("-y^3/(10^5*x^5)", XY)})
    assert out == lam_xy


def test_substitute_identity_bindings():
    f = parse("(lam + mu^2)/(1 - lam*mu)", LM)
    assert substitute(f, {}) == f
    g = gens(K)
    assert substitute(f, {"lam": g["lam"], "mu": g["mu"]}) == f


def test_substitute_l0_into_xy():
    l0 = parse("2*mu*(-1 + 15*lam + 100*lam^2)/(lam + 16*lam^2 - 80*lam^3 + 125*mu)", LM)
    inv = {"lam": parse("1/4 - y/(20*x^2)", XY), "mu": parse("-y^3/(10^5*x^5)", XY)}
    expected = parse("-y^2*(4*x^2 - y)*(9*x^2 - y)/(250*x^3*(240*x^4 - 88*x^2*y + 8*y^2 - x*y^2))", XY)
    assert substitute(l0, inv) == expected


def test_substitute_round_trip_birational_pair():
    fwd = {"x": parse("25*mu/(2*(lam - 1/4)^3)", LM), "y": parse("-3125*mu^2/(lam - 1/4)^5", LM)}
    inv = {"lam": parse("1/4 - y/(20*x^2)", XY), "mu": parse("-y^3/(10^5*x^5)", XY)}
    f = parse("(lam^2 + 3*mu)/(lam - 7*mu + 1)", LM)
    assert substitute(substitute(f, inv), fwd) == f


def test_partial_simple():
    assert partial(lam**2 * mu, "lam") == 2 * lam * mu


def test_partial_power_rule_rational():
    f = parse("25*mu/(2*(lam - 1/4)^3)", LM)
    assert partial(f, "lam") == parse("-75*mu/(2*(lam - 1/4)^4)", LM)


def test_partial_matches_expanded_difference_quotient_oracle():
    # independent oracle: differentiate y^3/(10^5 x^5) termwise in sympy expressions
    import sympy

    x, y = sympy.symbols("x y")
    f = parse("y^3/(10^5*x^5)", XY)
    oracle = sympy.diff(y**3 / (10**5 * x**5), y)
    assert sympy.simplify(partial(f, "y").as_expr() - oracle) == 0
    assert partial(f, "y") == parse("3*y^2/(10^5*x^5)", XY)


def _rand_poly(rng):
    return sum(rng.randint(-3, 3) * lam**rng.randint(0, 2) * mu**rng.randint(0, 2) for _ in range(4))


def test_ring_axioms_and_leibniz_random():
    rng = random.Random(7)
    for _ in range(20):
        f, g, h = (_rand_poly(rng) for _ in range(3))
        assert (f + g) * h == f * h + g * h
        assert partial(f * g, "lam") == partial(f, "lam") * g + f * partial(g, "lam")
        assert theta(f * g, "mu") == theta(f, "mu") * g + f * theta(g, "mu")


def test_solve_identity_system():
    b = [Fraction(1, 2), Fraction(-3), Fraction(5, 7)]
    A = [[int(i == j) for j in range(3)] for i in range(3)]
    sol = solve_linear(A, b)
    assert sol.particular == b and sol.nullspace == []


def test_nullspace_of_row_vector():
    ns = nullspace([[K(lam), K(mu)]])
    assert len(ns) == 1
    v = ns[0]
    assert lam * v[0] + mu * v[1] == 0
    assert v[0] / v[1] == -K(mu) / K(lam)


def test_solution_and_nullspace_satisfy_system_random():
    rng = random.Random(3)
    for _ in range(10):
        A = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(5)] for _ in range(3)]
        b = [Fraction(rng.randint(-4, 4)) for _ in range(3)]
        sol = solve_linear(A, b)
        assert sol.consistent
        Ax = [sum(a * x for a, x in zip(row, sol.particular)) for row in A]
        assert Ax == b
        for n in sol.nullspace:
            assert all(sum(a * x for a, x in zip(row, n)) == 0 for row in A)
        assert rank(A) + len(sol.nullspace) == 5


def test_inconsistent_system():
    sol = solve_linear([[1, 1], [2, 2]], [1, 3])
    assert not sol.consistent


def test_rational_function_rows_with_constant_denominators():
    # regression: row scaling must keep rational constants such as 1/27
    A = [[K(1) / 27, K(lam)], [K(mu) / 9, K(1) / 3]]
    b = [K(1), K(lam) / 27]
    sol = solve_linear(A, b)
    for row, rhs in zip(A, b):
        assert sum((a * x for a, x in zip(row, sol.particular)), K.zero) == rhs


def test_bareiss_det_fraction_and_polynomial():
    assert bareiss_det([[Fraction(1, 2), 1], [1, 4]]) == 1
    assert bareiss_det([[lam, mu], [mu, lam]]) == lam**2 - mu**2
    M = [[K(1) / 27, K(lam)], [K(1), K(mu) / 3]]
    assert bareiss_det(M) == K(mu) / 81 - K(lam)


def test_mat_mul_shapes():
    assert mat_mul([[1, 2]], [[3], [4]]) == [[11]]


def test_biseries_validity_tracking():
    s = BiSeries.from_rule(lambda n, m: Fraction(n + 1, m + 1), 6)
    assert s.shift(1, 2).order == 3
    assert s.theta_lambda()[2, 1] == 2 * s[2, 1]
    with pytest.raises(IndexError):
        s[4, 3]


def test_rf_json_round_trip():
    f = parse("(3*lam^2 - mu/7)/(lam*mu + 1)", LM)
    assert rf_from_json(rf_to_json(f)) == f
