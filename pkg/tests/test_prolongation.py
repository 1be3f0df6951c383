from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liefinsler.algebroid import bracket_E, lift_section
from liefinsler.numeric import values
from liefinsler.prolongation import (
    apply,
    bracket_prolong,
    compose,
    d_function,
    d_oneform,
    dynamical_symmetry_defect,
    fn_bracket_section,
    fn_bracket_tensor,
    frame_section,
    homogeneity_defect_function,
    homogeneity_defect_section,
    lie_symmetry_defect,
    liouville,
    projective_change,
    semispray,
    semispray_defect,
    spray_defect,
    vertical_endomorphism,
)
from liefinsler.symcalc import X, Y, asarray, build, differentiate, parse_expr, sqrt


def sections(b, seed, k=3):
    """k seeded polynomial sections of E over the fixture base."""
    rng = np.random.default_rng(seed)
    m, n = b.A.m, b.A.n
    out = []
    for _ in range(k):
        c = rng.uniform(-1, 1, (n, m, 3))
        out.append(build((n,), lambda a: sum(c[a, i, 0] + c[a, i, 1] * X(i) + c[a, i, 2] * X(i) ** 2
                                             for i in range(m))))
    return out


def test_vertical_frame_brackets(bundles):
    b = bundles["so3"]
    n = b.A.n
    for a in range(n):
        for c in range(n):
            assert all(e.is_zero for e in bracket_prolong(b.A, frame_section(n, n + a), frame_section(n, n + c)))


@pytest.mark.parametrize("name", ["euclidean-tm", "so3", "conformal-tm"])
def test_lift_bracket_relations(bundles, name):
    b = bundles[name]
    A = b.A
    Xs, Ys, _ = sections(b, 11)
    XY = bracket_E(A, Xs, Ys)
    Xc, Yc = lift_section(A, Xs, "complete"), lift_section(A, Ys, "complete")
    Xv, Yv = lift_section(A, Xs, "vertical"), lift_section(A, Ys, "vertical")
    assert b.res(bracket_prolong(A, Xc, Yc), lift_section(A, XY, "complete")) <= 1e-9
    assert b.res(bracket_prolong(A, Xc, Yv), lift_section(A, XY, "vertical")) <= 1e-9
    assert b.res(bracket_prolong(A, Xv, Yv)) == 0.0


def test_liouville_bracket_with_semispray(bundles):
    b = bundles["so3"]
    n = 3
    comps = [parse_expr(t, (1, 3)) for t in ("y1^3/(1+y2^2)", "x1*y2*y3", "sin(y1)")]
    S = semispray(n, comps)
    got = bracket_prolong(b.A, liouville(n), S)
    oracle = build((2 * n,), lambda a: Y(a) if a < n else
                   sum(Y(k) * differentiate(comps[a - n], Y(k)) for k in range(n)) - comps[a - n])
    assert b.res(got, oracle) <= 1e-12


def test_vertical_endomorphism(bundles):
    b = bundles["so3"]
    n = 3
    J = vertical_endomorphism(n)
    assert all(e.is_zero for e in compose(J, J).flat)
    assert np.linalg.matrix_rank(values(J, b.ev)[0]) == n
    for Xs in sections(b, 5):
        assert b.res(apply(J, lift_section(b.A, Xs, "complete")), lift_section(b.A, Xs, "vertical")) == 0.0
    assert all(e.is_zero for e in apply(J, liouville(n)))


def test_liouville_identities(bundles):
    for name in ("so3", "conformal-tm"):
        b = bundles[name]
        n = b.A.n
        C = liouville(n)
        J = vertical_endomorphism(n)
        for Xs in sections(b, 2, 2):
            Xv = lift_section(b.A, Xs, "vertical")
            assert b.res(bracket_prolong(b.A, Xv, C), Xv) == 0.0
        assert b.res(fn_bracket_section(b.A, J, C), J) <= 1e-12
        assert b.res(fn_bracket_tensor(b.A, J, J)) <= 1e-12


def test_semispray_and_spray_defects(bundles):
    b = bundles["euclidean-tm"]
    n = 2
    assert b.res(semispray_defect(n, semispray(n, [0, 0]))) == 0.0
    S2 = semispray(n, [Y(0) ** 2, 0])
    assert b.res(spray_defect(n, S2)) == 0.0
    S3 = semispray(n, [Y(0) ** 3, 0])
    vals = values(spray_defect(n, S3), b.ev)
    assert np.allclose(np.abs(vals[:, 0]), np.abs(b.y[:, 0]) ** 3, rtol=1e-14)


def test_homogeneity_defects(bundles):
    b = bundles["euclidean-tm"]
    n = 2
    assert b.res(homogeneity_defect_function(n, sqrt(Y(0) ** 2 + Y(1) ** 2), 1)) <= 1e-14
    assert b.res(homogeneity_defect_section(n, liouville(n), 1)) == 0.0
    d = values(homogeneity_defect_function(n, Y(0) * Y(1), 1), b.ev)
    assert np.allclose(np.abs(d), np.abs(b.y[:, 0] * b.y[:, 1]))


def test_projective_change(bundles):
    b = bundles["conformal-tm"]
    n = 2
    from liefinsler.finsler import canonical_spray

    S0 = canonical_spray(b.FS)
    assert projective_change(n, S0, 0) is not S0
    assert b.res(projective_change(n, S0, 0), S0) == 0.0
    good = projective_change(n, S0, b.sc.scalars["ftilde"])
    assert b.res(spray_defect(n, good)) <= 1e-12
    bad = projective_change(n, S0, Y(0) ** 2)
    assert b.res(spray_defect(n, bad)) > 1e-3


def test_symmetry_defects(bundles):
    e = bundles["euclidean-tm"]
    S = semispray(2, [0, 0])
    xp, vp = lie_symmetry_defect(e.A, S, [1.0, -2.0])
    assert e.res(np.concatenate([xp, vp])) == 0.0
    b = bundles["so3"]
    n = 3
    S = semispray(n, [0, 0, 0])
    for Xs in sections(b, 9, 2):
        xp, vp = lie_symmetry_defect(b.A, S, Xs)
        br = bracket_prolong(b.A, S, lift_section(b.A, Xs, "complete"))
        assert b.res(np.concatenate([xp, vp]), br) <= 1e-12
    Sq = semispray(n, [parse_expr("y1*y2", (1, 3)), parse_expr("x1*y3^2", (1, 3)), 0])
    xp, vp = dynamical_symmetry_defect(b.A, Sq, Sq)
    assert b.res(np.concatenate([xp, vp])) == 0.0
    T = asarray([X(0), 1.0, Y(0), Y(1) * Y(2), 0.0, X(0) * Y(0)])
    xp, vp = dynamical_symmetry_defect(b.A, Sq, T)
    assert b.res(np.concatenate([xp, vp]), bracket_prolong(b.A, Sq, T)) <= 1e-12


def test_exterior_derivative_squares_to_zero(finsler_bundle):
    b = finsler_bundle
    assert b.res(d_oneform(b.A, d_function(b.A, b.FS.F))) <= 1e-9



coef = st.floats(-1.5, 1.5, allow_nan=False)


@settings(max_examples=25, deadline=None)
@given(st.lists(coef, min_size=12, max_size=12))
def test_prolongation_bracket_is_lie(bundles, c):
    b = bundles["so3"]
    A = b.A
    U = asarray([c[0] * X(0), c[1], c[2] * Y(0), c[3] * Y(1) * Y(0), c[4], c[5] * X(0) * Y(2)])
    W = asarray([c[6], c[7] * X(0) ** 2, c[8], c[9] * Y(2), c[10] * Y(1) ** 2, c[11]])
    Z = asarray([1.0, 0.0, Y(1), 0.0, Y(0), 0.0])
    br = lambda P, Q: bracket_prolong(A, P, Q)
    assert b.res(br(U, W) + br(W, U)) <= 1e-12
    jac = br(U, br(W, Z)) + br(W, br(Z, U)) + br(Z, br(U, W))
    assert b.res(jac) <= 1e-9
