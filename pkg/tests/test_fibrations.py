import random
from collections import Counter
from fractions import Fraction

import pytest

from k3lab.exactcore import irreducible_factors, parse_poly, poly_ring, rf_field, substitute
from k3lab.fibrations import (
    FibreType,
    QuarticModel,
    WeierstrassModel,
    chart_flip,
    classify_fibre,
    compare_printed,
    degeneracy_locus,
    discriminant,
    expected_fibres,
    family_model,
    fibre_table,
    in_lambda,
    is_generic,
    j_invariant,
    kodaira_type,
    lambda0_curve_parametrization,
    parse_fibre_list,
    random_lambda_point,
    singular_locus,
    specialize,
    to_weierstrass,
    verify_birational_map,
    weierstrass,
)

ZLM = ("z", "lam", "mu")
CASES = [(0, "default"), (1, "default"), (2, "default"), (3, "default"), (3, "alternate")]
TABLE_1 = {
    (0, "default"): "I3 + I15 + 6I1",
    (1, "default"): "I9 + I3* + 6I1",
    (2, "default"): "I1* + I11 + 6I1",
    (3, "default"): "I9 + I9 + 6I1",
    (3, "alternate"): "I10 + I2* + 6I1",
}


def test_family0_quartic_coefficients():
    Q = family_model(0)
    assert Q.c2 == parse_poly("lam^2+2*lam*z+z^2+2*lam*z^2+2*z^3+z^4", ZLM)
    assert Q.c1 == parse_poly("-2*lam*mu*z-2*mu*z^2-2*mu*z^3", ZLM)
    assert Q.c0 == parse_poly("mu^2*z^2", ZLM)


def test_family0_specialized_to_origin():
    Q = family_model(0)
    assert specialize(Q.c1, 0, 0) == 0 and specialize(Q.c0, 0, 0) == 0


def test_family3_default_leading_term():
    # printed with leading x1^3, rescaled to 4x^3: c2 is multiplied by 4
    assert family_model(3).c2 == 4 * parse_poly("mu^2 + 2*mu*z + z^2 + 2*mu*z^2 + 2*z^3 + z^4", ZLM)


def test_unknown_family():
    with pytest.raises(KeyError):
        family_model(7)
    with pytest.raises(ValueError):
        family_model(1, variant="alternate")


def test_no_shift_when_quadratic_term_vanishes():
    R = poly_ring(ZLM)
    b, c = parse_poly("3*z^2 + lam", ZLM), parse_poly("z^5 - mu", ZLM)
    W = to_weierstrass(QuarticModel("z", R.zero, b, c))
    assert W.g2 == -b and W.g3 == -c


def test_family0_g2_leading_terms():
    g2 = weierstrass(0).g2
    # (1/216)(18 lam^4 + 432 lam mu z + ...)
    assert g2.coeff(parse_poly("lam^4", ZLM)) == Fraction(18, 216)
    assert g2.coeff(parse_poly("lam*mu*z", ZLM)) == Fraction(432, 216)


def test_family0_h2():
    h2 = weierstrass(0, "infinite").g2
    expected = parse_poly("2*mu*z1^5*(1+z1+lam*z1^2) + (1+z1+lam*z1^2)^4/12", ("z1", "lam", "mu"))
    assert h2 == expected


def test_flip_of_constants():
    W = WeierstrassModel.from_text("z", "5", "7")
    Wi = chart_flip(W)
    assert str(Wi.g2.as_expr()) == "5*z1**8"
    assert str(Wi.g3.as_expr()) == "7*z1**12"


@pytest.mark.parametrize("j,variant", CASES)
def test_flip_is_involution(j, variant):
    W = weierstrass(j, "finite", variant)
    WW = chart_flip(chart_flip(W))
    assert WW.g2 == W.g2 and WW.g3 == W.g3


@pytest.mark.parametrize("j,variant", CASES)
def test_discriminant_transforms_with_weight_24(j, variant):
    W = weierstrass(j, "finite", variant)
    D = discriminant(W)
    Di = discriminant(chart_flip(W))
    flipped = Di.ring({(24 - e[0],) + e[1:]: c for e, c in D.terms()})
    assert Di == flipped


def test_family0_discriminant_shape():
    D = discriminant(weierstrass(0))
    R = D.ring
    z, lam, mu = R.gens
    q, r = D.div(mu**3 * z**3)
    assert r == 0
    assert q.coeff(lam**3) != 0
    # the printed D0 = 64 mu^3 z^3 (lam^3 + ...) agrees up to a constant
    assert [c["match"] for c in compare_printed(0) if c["item"] == "D0"] == [True]


def test_family3_infinite_discriminant_shape():
    Di = discriminant(weierstrass(3, "infinite"))
    z1, lam, mu = Di.ring.gens
    assert Di.div(lam**3 * z1**9)[1] == 0


def test_discriminant_of_cusp_constants():
    W = WeierstrassModel.from_text("z", "3", "1")
    assert discriminant(W) == 0


def test_j_invariant_special_values():
    K = rf_field(ZLM)
    assert j_invariant(WeierstrassModel.from_text("z", "z + lam", "0")) == K.one
    assert j_invariant(WeierstrassModel.from_text("z", "0", "z - mu")) == K.zero


def test_j_invariant_pole_order_three_at_origin():
    W = weierstrass(0)
    D = specialize(discriminant(W), 1, 1)
    g2 = specialize(W.g2, 1, 1)
    z = D.ring.gens[0]
    assert g2.rem(z) != 0
    assert D.rem(z**3) == 0 and D.rem(z**4) != 0


@pytest.mark.parametrize(
    "v2,v3,vd,name",
    [(0, 0, 5, "I5"), (2, 3, 6, "I0*"), (2, 3, 9, "I3*"), (1, 1, 2, "II"), (1, 2, 3, "III"),
     (2, 2, 4, "IV"), (3, 4, 8, "IV*"), (3, 5, 9, "III*"), (4, 5, 10, "II*")],
)
def test_kodaira_table(v2, v3, vd, name):
    assert str(kodaira_type(v2, v3, vd)) == name


def test_kodaira_table_rejects_non_minimal():
    with pytest.raises(ValueError):
        kodaira_type(4, 6, 12)


def test_euler_numbers():
    assert FibreType.parse("I_3^*").euler == 9
    assert FibreType.parse("I15").euler == 15
    assert sum(FibreType.parse(t).euler for t in ("II", "III", "IV", "IV*", "III*", "II*")) == 36


def test_classification_at_named_locations():
    assert str(classify_fibre(weierstrass(0), 0, 1, 1)) == "I3"
    assert str(classify_fibre(weierstrass(1), "infinity", Fraction(2, 3), Fraction(-1, 5))) == "I3*"
    assert str(classify_fibre(weierstrass(2), 0, Fraction(2, 3), Fraction(-1, 5))) == "I1*"


def test_classification_invariant_under_rescaling():
    W = weierstrass(2)
    u = Fraction(3, 2)
    Wu = WeierstrassModel("y", W.g2 * u**4, W.g3 * u**6)
    for loc in (0, "infinity"):
        assert classify_fibre(W, loc, 2, -3) == classify_fibre(Wu, loc, 2, -3)


def test_family0_table_at_one_one():
    T = fibre_table(0, 1, 1)
    assert T.multiset() == parse_fibre_list("I3 + I15 + 6I1")
    assert T.euler_sum == 24


@pytest.mark.parametrize("j,variant", CASES)
def test_table_one_at_random_generic_points(j, variant):
    rng = random.Random(100 + j + (variant == "alternate"))
    for _ in range(5):
        lam0, mu0 = random_lambda_point(j, rng, variant=variant)
        T = fibre_table(j, lam0, mu0, variant)
        assert T.multiset() == expected_fibres(j, variant) == parse_fibre_list(TABLE_1[(j, variant)])
        assert T.euler_sum == 24


@pytest.mark.parametrize(
    "j,variant,pt,summary",
    [
        (1, "default", (1, 1), "I10 + I3* + 5I1"),
        (1, "default", (-2, Fraction(-3, 2)), "I3* + I9 + II + 4I1"),
        (2, "default", (Fraction(-1, 3), Fraction(-16, 27)), "I11 + I1* + II + 4I1"),
        (3, "alternate", (1, -1), "I10 + I2* + I2 + 4I1"),
    ],
)
def test_degenerate_points_inside_domain(j, variant, pt, summary):
    assert in_lambda(j, *pt)
    assert not is_generic(j, *pt, variant)
    T = fibre_table(j, *pt, variant)
    assert T.summary() == summary
    assert T.euler_sum == 24


def test_degeneracy_loci():
    assert degeneracy_locus(0) == [] and degeneracy_locus(3) == []
    assert [str(f.as_expr()) for f in degeneracy_locus(3, "alternate")][0] == "lam + mu"
    assert "lam - mu" in [str(f.as_expr()) for f in degeneracy_locus(1)]


def test_i1_cofactor_square_free_at_random_points():
    rng = random.Random(5)
    W = weierstrass(0)
    for _ in range(5):
        lam0, mu0 = random_lambda_point(0, rng)
        D = specialize(discriminant(W), lam0, mu0)
        facs = Counter()
        for f, e in irreducible_factors(D):
            if f.degree() >= 1 and f.rem(D.ring.gens[0]) != 0:
                facs[e] += f.degree()
        assert facs == Counter({1: 6})


def test_fibre_table_rejects_singular_parameters():
    with pytest.raises(ValueError):
        fibre_table(0, 0, 1)


def test_singular_loci():
    lm = ("lam", "mu")
    assert singular_locus(0)[2] == parse_poly("lam^2*(4*lam-1)^3-2*(2+25*lam*(20*lam-1))*mu-3125*mu^2", lm)
    assert singular_locus(1)[2] == parse_poly("729*lam^2-54*lam*(27*mu-1)+(1+27*mu)^2", lm)
    assert [str(f.as_expr()) for f in singular_locus(2)[:2]] == ["lam", "mu"]


def test_family0_singular_curve_parametrization():
    lam_a, mu_a = lambda0_curve_parametrization()
    f = rf_field(("lam", "mu"))(singular_locus(0)[2].as_expr())
    assert substitute(f, {"lam": lam_a, "mu": mu_a}) == 0


@pytest.mark.parametrize("j,variant", CASES)
def test_birational_maps(j, variant):
    assert verify_birational_map(j, variant)


def test_printed_weierstrass_forms_family0():
    assert all(c["match"] for c in compare_printed(0))
