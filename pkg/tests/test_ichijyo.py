from __future__ import annotations

import numpy as np
import pytest

from liefinsler.algebroid import AlgebroidError
from liefinsler.connections import berwald_type, torsion_components
from liefinsler.finsler import barthel, distinguished_connection, first_cartan
from liefinsler.horizontal import HorizontalEndo, curvature_coefficients
from liefinsler.ichijyo import (
    LinearConnectionE,
    cartan_derivative_symmetry,
    classify,
    deflection_difference,
    generalized_berwald_report,
    h_from_nabla,
    hbar_conservativity,
    hbar_deformation,
    ichijyo_connection,
    ichijyo_curvature_closed,
    ichijyo_torsion_prediction,
    is_h_basic,
    nabla_curvature_relation,
    nabla_from_h,
    vertical_lift_check,
    wagner_report,
    wagner_torsion_target,
)
from liefinsler.connections import curvature_components
from liefinsler.symcalc import X, Y, build, zeros

from test_horizontal import linear_B


def nabla_of(b, Gamma=None):
    return LinearConnectionE(b.A, b.sc.Gamma if Gamma is None else Gamma)


def random_gamma(n, seed):
    c = np.random.default_rng(seed).uniform(-1, 1, (n, n, n, 2))
    return build((n, n, n), lambda g, a, b: c[g, a, b, 0] + c[g, a, b, 1] * X(0))


def test_h_from_nabla_roundtrip(bundles):
    b = bundles["conformal-tm"]
    G = random_gamma(2, 1)
    h = h_from_nabla(nabla_of(b, G))
    assert b.res(nabla_from_h(h), G) == 0.0
    assert b.res(h.B, barthel(b.FS).B) > 0.1


def test_fiber_dependent_connection_rejected(bundles):
    b = bundles["euclidean-tm"]
    G = zeros(2, 2, 2)
    G[0, 0, 0] = Y(0)
    with pytest.raises(AlgebroidError):
        LinearConnectionE(b.A, G)


@pytest.mark.parametrize("name", ["so3", "conformal-tm"])
def test_vertical_lift_of_covariant_derivative(bundles, name):
    b = bundles[name]
    nabla = nabla_of(b, random_gamma(b.A.n, 5))
    for a in range(b.A.n):
        for c in range(b.A.n):
            lhs, rhs = vertical_lift_check(nabla, a, c)
            assert b.res(lhs, rhs) <= 1e-12


@pytest.mark.parametrize("name", ["so3", "conformal-tm"])
def test_curvature_relation(bundles, name):
    b = bundles[name]
    lhs, rhs = nabla_curvature_relation(nabla_of(b, random_gamma(b.A.n, 9)))
    assert b.res(lhs, rhs) <= 1e-9


def test_flat_iff_curvature_of_h_vanishes(bundles):
    s = bundles["so3"]
    nabla = nabla_of(s)
    assert s.res(nabla.curvature()) > 0.1
    assert s.res(curvature_coefficients(h_from_nabla(nabla))) > 0.1
    c = bundles["conformal-tm"]
    conformal = nabla_of(c)
    assert c.res(conformal.curvature()) <= 1e-12
    assert c.res(curvature_coefficients(h_from_nabla(conformal))) <= 1e-12
    e = bundles["euclidean-tm"]
    flat = nabla_of(e)
    assert e.res(flat.curvature()) == 0.0
    assert e.res(curvature_coefficients(h_from_nabla(flat))) == 0.0


def test_ichijyo_on_euclidean_is_zero(bundles):
    e = bundles["euclidean-tm"]
    D = ichijyo_connection(e.FS, nabla_of(e))
    assert e.res(D.F) == 0.0 and e.res(D.C) == 0.0


@pytest.mark.parametrize("name", ["so3", "conformal-tm", "quartic-finsler"])
def test_ichijyo_torsion_and_curvature(bundles, name):
    b = bundles[name]
    nabla = nabla_of(b, random_gamma(b.A.n, 4))
    D = ichijyo_connection(b.FS, nabla)
    got, want = torsion_components(D), ichijyo_torsion_prediction(b.FS, nabla)
    for k in want:
        assert b.res(got[k], want[k]) <= 1e-9, k
    for T, closed in zip(curvature_components(D), ichijyo_curvature_closed(b.FS, nabla)):
        assert b.res(T, closed) <= 1e-7


def test_h_basic_detection(bundles):
    q = bundles["quartic-finsler"]
    assert not is_h_basic(distinguished_connection(q.FS, "cartan"), q.ev).h_basic
    c = bundles["conformal-tm"]
    # Riemannian energy: the Cartan horizontal coefficients are x-only
    assert is_h_basic(distinguished_connection(c.FS, "cartan"), c.ev).h_basic
    s = bundles["so3"]
    D = berwald_type(HorizontalEndo(s.A, linear_B(3, 2)))
    r = is_h_basic(D, s.ev)
    assert r.h_basic and r.Gamma is not None
    G = random_gamma(3, 8)
    r = is_h_basic(ichijyo_connection(s.FS, nabla_of(s, G)), s.ev)
    assert r.h_basic and s.res(r.Gamma, G) == 0.0


def test_h_basic_deflection_difference(bundles):
    s = bundles["so3"]
    G = random_gamma(3, 12)
    nabla = nabla_of(s, G)
    D = ichijyo_connection(s.FS, nabla)
    assert is_h_basic(D, s.ev).h_basic
    for a in range(3):
        lhs, rhs = deflection_difference(D, nabla, a)
        assert s.res(lhs, rhs) <= 1e-9


def test_cartan_derivative_symmetry(bundles):
    q = bundles["quartic-finsler"]
    D = distinguished_connection(q.FS, "hashiguchi")
    lhs, rhs = cartan_derivative_symmetry(D, q.FS)
    assert q.res(lhs, rhs) <= 1e-8


@pytest.mark.parametrize("name", ["so3", "conformal-tm", "euclidean-tm"])
def test_generalized_berwald_examples(bundles, name):
    b = bundles[name]
    rep = generalized_berwald_report(b.FS, nabla_of(b), b.ev)
    assert rep.generalized_berwald and rep.agree


def test_zero_connection_on_conformal_fails_all_three(bundles):
    c = bundles["conformal-tm"]
    rep = generalized_berwald_report(c.FS, nabla_of(c, zeros(2, 2, 2)), c.ev)
    assert rep.passes == (False, False, False) and rep.agree


def test_classification_ladder(bundles):
    e = bundles["euclidean-tm"]
    r = classify(e.FS, nabla_of(e), e.ev)
    assert r["is_generalized_berwald"] and r["is_berwald"] and r["is_minkowski"]
    s = bundles["so3"]
    r = classify(s.FS, nabla_of(s), s.ev)
    assert r["is_berwald"] and not r["is_minkowski"]
    w = bundles["wagner-e1"]
    r = classify(w.FS, nabla_of(w), w.ev)
    assert r["is_generalized_berwald"] and not r["is_berwald"]


def test_hashiguchi_equals_ichijyo_for_berwald(bundles):
    c = bundles["conformal-tm"]
    nabla = nabla_of(c)
    assert c.res(h_from_nabla(nabla).B, barthel(c.FS).B) <= 1e-12
    H, I = distinguished_connection(c.FS, "hashiguchi"), ichijyo_connection(c.FS, nabla)
    assert c.res(H.F, I.F) <= 1e-12 and c.res(H.C, I.C) <= 1e-12


def test_torsion_free_connection_is_unique(bundles):
    c = bundles["conformal-tm"]
    other = nabla_of(c, c.sc.Gamma + build((2, 2, 2), lambda g, a, b: 0.1 if g == 0 else 0.0))
    rep = generalized_berwald_report(c.FS, other, c.ev)
    assert not (rep.generalized_berwald and c.res(other.torsion()) <= 1e-9)


def test_wagner_constant_function_reduces_to_berwald(bundles):
    c = bundles["conformal-tm"]
    rep = wagner_report(c.FS, nabla_of(c), 0.0 * X(0) + 1.0, c.ev)
    assert rep.passed


def test_wagner_fixture(bundles):
    w = bundles["wagner-e1"]
    rep = wagner_report(w.FS, nabla_of(w), w.sc.scalar("f"), w.ev)
    assert rep.passed
    assert w.res(nabla_of(w).torsion(), wagner_torsion_target(w.A, w.sc.scalar("f"))) <= 1e-12


def test_wagner_broken_torsion(bundles):
    w = bundles["wagner-e1"]
    G = w.sc.Gamma.copy()
    G[1, 1, 0] = 2 * G[1, 1, 0]
    rep = wagner_report(w.FS, nabla_of(w, G), w.sc.scalar("f"), w.ev)
    assert not rep.b_torsion_form.passes(w.sc.settings.tol)


def test_wagner_rejects_fiber_function(bundles):
    w = bundles["wagner-e1"]
    with pytest.raises(AlgebroidError):
        wagner_report(w.FS, nabla_of(w), Y(0), w.ev)


def test_hbar_deformation(bundles):
    c = bundles["conformal-tm"]
    nabla = nabla_of(c)
    hb, nb = hbar_deformation(nabla, 0.0 * X(0) + 3.0)
    assert c.res(hb.B, h_from_nabla(nabla).B) == 0.0 and c.res(nb.Gamma, nabla.Gamma) == 0.0
    s = bundles["so3"]
    cons, df = hbar_conservativity(s.FS, nabla_of(s), s.sc.scalar("f"), s.ev)
    assert cons.max <= 1e-12 and df.max == 0.0
    e = bundles["euclidean-tm"]
    cons, df = hbar_conservativity(e.FS, nabla_of(e), e.sc.scalar("f"), e.ev)
    assert cons.max > 0.1 and df.max > 0.1


def test_first_cartan_of_riemannian_fixture_is_zero(bundles):
    c = bundles["conformal-tm"]
    assert c.res(first_cartan(c.FS)[0]) <= 1e-12
