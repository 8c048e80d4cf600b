"""Acceptance suite: one check per criterion, each printing a PASS or FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or through pytest.
Criteria whose literal statement cannot be reproduced are marked as strict
expected failures; the reproducible parts are asserted separately.
"""

import random
import sys
from fractions import Fraction

import numpy as np
import pytest

from k3lab import hilbert as H
from k3lab import lattices as L
from k3lab import monodromy as MD
from k3lab.fibrations import expected_fibres, fibre_table, random_lambda_point
from k3lab.periods import annihilates, appell_f4, gkz_operators, operator, period_series, printed_operator
from k3lab.pfaffian import (
    check_integrability,
    compare_entries,
    derived_system,
    matches_parameter_locus,
    pfaffian_data,
    printed_pfaffian,
    singular_locus_from,
)
from k3lab.polytopes import is_fano, is_reflexive_terminal, polytope


def _report(n, ok, failures):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}"
    if failures:
        line += "  (" + "; ".join(failures) + ")"
    return line


# each checker returns a dict: part name -> bool


def criterion_1():
    k = L.K_SYM
    mw = L.mw_claims()
    parts = {f"det {key}": L.det_exact(L.build_M(key)) == L.PRINTED_DETS[key]
             for key in (0, 1, 2, 3, "L3prime", "T2", "T3")}
    parts["det L2tilde"] = mw["L2tilde"] == -38
    parts["det Tbar1"] = mw["Tbar1"] == -72 * (1 + k + k**2)
    parts["det L1tilde"] = [mw[f"L1tilde_a{p}"] for p in (1, 4, 7)] == [12, -30, 6]
    parts["det L3tilde"] = {mw["L3tilde_q0"], mw["L3tilde_q1"]} == {-16, -112}
    return parts


def criterion_2():
    return {f"certificate {j}": abs(L.det_exact(L.certificate(j))) == 1
            and L.verify_equivalence(L.build_M(j), L.certificate(j), L.ns_target(j)) for j in range(4)}


def criterion_3():
    parts = {}
    for j in range(4):
        _, gm = L.orthogonal_complement(L.ns_embedding(j, 3))
        g = L.find_congruence(gm, L.TRANSCENDENTAL[j], 3)
        parts[f"complement {j}"] = g is not None and L.transform(gm, g) == L.TRANSCENDENTAL[j]
    return parts


def criterion_4():
    parts = {}
    for j in range(4):
        rng = random.Random(4000 + j)
        ok = True
        for _ in range(5):
            lam0, mu0 = random_lambda_point(j, rng)
            T = fibre_table(j, lam0, mu0)
            ok &= T.multiset() == expected_fibres(j) and T.euler_sum == 24
        parts[f"fibre list family {j}"] = ok
    return parts


def criterion_5():
    parts = {}
    for j in range(4):
        s = period_series(j, 14)
        for name in ("D1", "D2", "D3"):
            parts[f"printed D{name[1]}^({j})"] = annihilates(printed_operator(j, name), s)
        parts[f"GKZ reduction {j}"] = all(annihilates(op, period_series(j, 12)) for op in gkz_operators(j))
    g1, g2 = gkz_operators(0)
    parts["reduction equals printed (0)"] = g1 == printed_operator(0, "D1") and g2 == printed_operator(0, "D2")
    return parts


def criterion_6():
    s = period_series(1, 12)
    F = appell_f4(Fraction(1, 3), Fraction(2, 3), 1, 1, 12)
    return {"F4(1/3,2/3,1,1;27lam,27mu)": all(s[k] == F[k] for k in s.indices())}


def criterion_7():
    parts = {}
    for j in range(4):
        D = derived_system(j)
        parts[f"printed integrable {j}"] = check_integrability(pfaffian_data(j))
        parts[f"derivation entrywise {j}"] = all(e.status == "match"
                                                 for e in compare_entries(printed_pfaffian(j, "read"), D))
        parts[f"singular locus {j}"] = matches_parameter_locus(singular_locus_from(D), j)
    apparent = singular_locus_from(derived_system(0)).apparent_factors
    parts["s apparent (0)"] = len(apparent) == 2
    return parts


def criterion_8():
    tol = 1e-6
    parts = {}
    A0 = L.TRANSCENDENTAL[0]
    parts["generators isometries"] = all(MD.is_isometry(MD.GENERATORS[n], A0) for n in MD.PO_GENERATORS)
    parts["component test"] = {n for n in MD.PO_GENERATORS if MD.component_test(MD.GENERATORS[n])} == set(
        MD.PO_PLUS_GENERATORS)
    base = (0.1 + 0.03j, 0.0007 + 0.0001j)
    triv = MD.transport(0, MD.circle("lam", (base[0] + 0.001, base[1]), base[0]), tol=1e-9)
    parts["contractible loop"] = triv.converged and MD.is_identity(triv.M, tol)
    loops = MD.standard_loops(0)
    res = {k: MD.transport(0, lp, tol=1e-9) for k, lp in loops.items()}
    parts["step halving"] = all(r.converged for r in res.values())
    parts["quasi-unipotent"] = all(MD.quasi_unipotent(r.M, tol)[0] for r in res.values())
    parts["reflection"] = all(np.abs(res[k].M @ res[k].M - np.eye(4)).max() < tol for k in res if k.startswith("disc"))
    fit = MD.fit_integral_basis([r.M for r in res.values()])
    parts["integral isometries"] = fit is not None and all(
        (lambda rep: rep.integral and rep.isometry)(MD.integrality_check(r, fit.B, tol=tol)) for r in res.values())
    return parts


def criterion_9():
    U = H.conformal_structure_xy()
    return {
        "Klein relation": H.verify_klein_relation(),
        "transform to uniformizing": H.transformed_period_system().differences(H.uniformizing_system()) == [],
        "normalization (printed)": H.system_from_normalization(U.l, U.m, H.printed_normalization())
        == H.uniformizing_system(),
        "normalization (Sato)": H.system_from_normalization(U.l, U.m, H.sato_normalization()) == H.sato_system(),
        "branch pullback": any(g == H.singular_locus_factor() for g, _ in H.branch_pullback_factors()),
    }


def criterion_10():
    return {
        "reflexive terminal": all(is_reflexive_terminal(polytope(j)) for j in range(5)),
        "Fano set": {j for j in range(5) if is_fano(polytope(j))} == {0, 2, 3, 4},
    }


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}

# parts that cannot be reproduced, with the reason
UNATTAINABLE = {
    1: ({"det T2", "det T3", "det Tbar1"},
        "signature (1,16) forces det T2 = +44, det T3 = +40; the Tbar1 configuration gives -72(1+k)"),
    5: ({"printed D2^(1)", "printed D1^(3)"}, "two printed operators do not annihilate the period"),
    6: ({"F4(1/3,2/3,1,1;27lam,27mu)"}, "the alternating period needs arguments -27 lam, -27 mu"),
    7: ({"printed integrable 0", "printed integrable 2", "derivation entrywise 0", "derivation entrywise 2"},
        "printed a24/b24 (family 0) and a22 (family 2) are wrong"),
}


def evaluate(n):
    parts = CRITERIA[n]()
    failures = sorted(k for k, v in parts.items() if not v)
    return not failures, failures


def _check(n, capsys):
    ok, failures = evaluate(n)
    with capsys.disabled():
        print("\n" + _report(n, ok, failures))
    return ok, failures


@pytest.mark.parametrize("n", [2, 3, 4, 8, 9, 10])
def test_criterion(n, capsys):
    ok, failures = _check(n, capsys)
    assert ok, failures


@pytest.mark.parametrize("n", sorted(UNATTAINABLE))
@pytest.mark.xfail(strict=True, reason="literal statement not reproducible; see UNATTAINABLE")
def test_criterion_literal(n, capsys):
    ok, failures = _check(n, capsys)
    assert ok, failures


@pytest.mark.parametrize("n", sorted(UNATTAINABLE))
def test_criterion_failures_are_only_the_known_ones(n):
    """Everything outside the documented defects passes."""
    _, failures = evaluate(n)
    expected, _ = UNATTAINABLE[n]
    assert set(failures) == expected


def test_criterion_1_magnitudes():
    assert abs(L.det_exact(L.build_M("T2"))) == 44 and abs(L.det_exact(L.build_M("T3"))) == 40


def test_criterion_5_corrected_operators():
    for j, name in ((1, "D2"), (3, "D1")):
        assert annihilates(operator(j, name), period_series(j, 14))


def test_criterion_6_sign_corrected():
    s = period_series(1, 12)
    F = appell_f4(Fraction(1, 3), Fraction(2, 3), 1, 1, 12, x_scale=-27, y_scale=-27)
    assert all(s[k] == F[k] for k in s.indices())


def test_criterion_7_derived_and_corrected():
    from k3lab.pfaffian import corrected_pfaffian

    for j in range(4):
        assert check_integrability(derived_system(j))
        assert corrected_pfaffian(j) == derived_system(j)


if __name__ == "__main__":
    bad = 0
    for n in CRITERIA:
        ok, failures = evaluate(n)
        bad += not ok
        print(_report(n, ok, failures))
    sys.exit(1 if bad else 0)
