"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line (printed immediately and repeated in the
terminal summary by ``conftest.pytest_terminal_summary``).
"""

from __future__ import annotations

import numpy as np
import pytest
from click.testing import CliRunner

from liefinsler import checks
from liefinsler.cli import main
from liefinsler.finsler import KINDS, canonical_spray, distinguished_connection, fundamental_form_definitional
from liefinsler.horizontal import (
    HorizontalEndo,
    associated_semispray,
    from_semispray,
    spray_endo_prediction,
    weak_torsion_block,
)
from liefinsler.ichijyo import LinearConnectionE, hbar_conservativity, wagner_report
from liefinsler.numeric import values
from liefinsler.prolongation import d_function, interior, vertical_endomorphism
from liefinsler.scenario import load_fixture, load_scenario
from liefinsler.symcalc import Evaluator, parse_expr

from conftest import FINSLER_FIXTURES, WAGNER_SCENARIO
from test_horizontal import linear_B

RESULTS: dict[int, tuple[bool, str]] = {}
GAMMA_FIXTURES = ("euclidean-tm", "so3", "conformal-tm", "quartic-finsler")


@pytest.fixture(scope="module")
def suites():
    return {name: checks.run("identity-suite", load_fixture(name)) for name in FINSLER_FIXTURES}


def worst(report, *ids):
    """Largest residual among the named checks; every id must be present."""
    by_id = {c.id: c for c in report.checks}
    missing = [i for i in ids if i not in by_id]
    assert not missing, f"{report.scenario}: missing checks {missing}"
    return max(by_id[i].residual for i in ids)


def verdict(number: int, ok: bool, detail: str) -> None:
    RESULTS[number] = (ok, detail)
    print(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
    assert ok, detail


def test_criterion_01_structure_equations():
    ids = ("algebroid.anchor_homomorphism", "algebroid.jacobi")
    good = max(worst(checks.run("verify-algebroid", load_fixture(n)), *ids)
               for n in ("euclidean-tm", "so3", "conformal-tm"))
    bad = worst(checks.run("verify-algebroid", load_fixture("broken-jacobi")), "algebroid.jacobi")
    verdict(1, good <= 1e-9 and bad >= 1e-2,
            f"structure equations max {good:.2e} (<= 1e-9); broken-jacobi {bad:.2e} (>= 1e-2)")


def test_criterion_02_prolongation_algebra(suites):
    ids = [f"prolongation.{k}[{i}]" for i in range(3)
           for k in ("complete_complete", "complete_vertical", "vertical_vertical")]
    r = max(worst(s, *ids) for s in suites.values())
    ok = r <= 1e-9
    for name in FINSLER_FIXTURES:
        n = load_fixture(name).n
        Jv = values(vertical_endomorphism(n), Evaluator(np.zeros((1, 1)), np.zeros((1, n))))[0]
        ok &= bool(np.all(Jv @ Jv == 0.0)) and np.linalg.matrix_rank(Jv) == n
        ok &= worst(suites[name], "prolongation.J_squared", "prolongation.J_rank") == 0.0
    verdict(2, ok, f"lift brackets max {r:.2e} (<= 1e-9); J^2 = 0 and rank J = n exactly")


def test_criterion_03_almost_complex(suites):
    ids = ["barthel_endo.almost_complex"] + [f"barthel_endo.{k}" for k in ("FJ", "Fh", "JF", "Fv")]
    r = max(worst(s, *ids) for s in suites.values())
    verdict(3, r <= 1e-10, f"F^2 + Id and F/J/h/v relations max {r:.2e} (<= 1e-10)")


def test_criterion_04_spray_endo_on_so3(bundles):
    s = bundles["so3"]
    h = HorizontalEndo(s.A, linear_B(3, 1))
    torsion = s.res(weak_torsion_block(h))
    r = s.res(from_semispray(s.A, associated_semispray(h)).B, spray_endo_prediction(h))
    verdict(4, r <= 1e-8 and torsion > 1e-2,
            f"h_S = h - 1/2 i_S t residual {r:.2e} (<= 1e-8) for h with torsion {torsion:.2f}")


def test_criterion_05_barthel_characterization(suites, bundles):
    rep = suites["conformal-tm"]
    hom = worst(rep, "barthel.homogeneity")
    tor = worst(rep, "barthel.torsion")
    cons = worst(rep, "barthel.conservative")
    c = bundles["conformal-tm"]
    S0 = canonical_spray(c.FS)
    x = np.column_stack([np.zeros(8), c.x[:, 1]])
    ev = Evaluator(x, c.y)
    y1, y2 = c.y[:, 0], c.y[:, 1]
    derived = np.max(np.abs(values(S0[2:], ev) - np.column_stack([y2**2 - y1**2, -2 * y1 * y2])))
    energy = c.res(interior(S0, fundamental_form_definitional(c.FS)) + d_function(c.A, c.FS.F))
    ok = hom <= 1e-10 and tor <= 1e-10 and cons <= 1e-8 and derived <= 1e-9 and energy <= 1e-8
    verdict(5, ok, f"homogeneity {hom:.1e}, weak torsion {tor:.1e}, conservativity {cons:.1e}, "
                   f"S0 at x1=0 {derived:.1e}, i_S0 w + dF {energy:.1e}")


def test_criterion_06_fundamental_form(suites):
    ids = ("finsler.iJ_omega", "finsler.lieC_omega", "finsler.iC_omega", "finsler.metric_liouville")
    r = max(worst(s, *ids) for s in suites.values())
    verdict(6, r <= 1e-9, f"i_J w, L_C w - w, i_C w - d_J F, G(C,C) - 2F max {r:.2e} (<= 1e-9)")


def test_criterion_07_berwald_type(suites):
    p = "connection.berwald-type."
    defl = max(worst(s, p + "deflection") for s in suites.values())
    tor = max(worst(s, p + "torsion_F_t") for s in suites.values())
    sym = max(worst(s, p + "P_symmetric", p + "P_symmetric_last", p + "P_degree") for s in suites.values())
    iS = max(worst(s, p + "iS_P") for s in suites.values())
    ok = defl <= 1e-9 and tor <= 1e-8 and sym <= 1e-8 and iS <= 1e-9
    verdict(7, ok, f"deflection {defl:.1e}, torsion {tor:.1e}, P symmetry/degree {sym:.1e}, i_S P {iS:.1e}")


def test_criterion_08_yano_douglas(suites):
    ric = max(worst(s, "connection.yano-type.ricci") for s in suites.values())
    dg = max(worst(s, "douglas.iS", "douglas.ricci") for s in suites.values())
    proj = worst(checks.run("douglas", load_fixture("conformal-tm"), projective="ftilde"), "douglas.projective")
    ok = ric <= 1e-8 and dg <= 1e-9 and proj <= 1e-6
    verdict(8, ok, f"Yano Ricci {ric:.1e}, i_S D / D_ric {dg:.1e}, projective invariance {proj:.1e}")


def test_criterion_09_metricity_trio(suites, bundles):
    ids = ("connection.cartan.metric", "connection.chern-rund.h_metric", "connection.hashiguchi.v_metric")
    r = max(worst(suites[n], *ids) for n in ("conformal-tm", "quartic-finsler"))
    e = bundles["euclidean-tm"]
    Ds = [distinguished_connection(e.FS, k) for k in KINDS]
    coincide = max(max(e.res(D.F, Ds[0].F), e.res(D.C, Ds[0].C)) for D in Ds[1:])
    verdict(9, r <= 1e-7 and coincide == 0.0,
            f"metricity max {r:.2e} (<= 1e-7); euclidean distinguished connections differ by {coincide:.1e}")


def test_criterion_10_berwald_derivative(suites):
    ids = ("berwald_derivative.A", "berwald_derivative.R1", "berwald_derivative.curvature_R",
           "berwald_derivative.curvature_P", "berwald_derivative.curvature_S")
    r = max(worst(s, *ids) for s in suites.values())
    verdict(10, r <= 1e-9, f"A = t, R1 = Omega and curvature blocks max {r:.2e} (<= 1e-9)")


def test_criterion_11_ichijyo(suites):
    reps = dict(suites)
    reps["wagner-e1"] = checks.run("identity-suite", load_scenario(WAGNER_SCENARIO))
    agree = [n for n, s in reps.items() if {c.id: c for c in s.checks}["ichijyo.berwald_conditions_agree"].passed]
    rel = max(worst(s, "ichijyo.curvature_relation") for s in reps.values())
    gb = [s for s in reps.values() if any(c.id == "ichijyo.mixed_curvature" for c in s.checks)]
    mixed = max(worst(s, "ichijyo.mixed_curvature") for s in gb)
    ok = len(agree) >= 4 and rel <= 1e-9 and mixed <= 1e-8 and len(gb) >= 1
    verdict(11, ok, f"three conditions agree on {len(agree)} fixtures; y-contraction {rel:.1e}; "
                    f"mixed curvature {mixed:.1e} on {len(gb)} generalized Berwald fixtures")


def test_criterion_12_wagner(bundles):
    w = bundles["wagner-e1"]
    rep = wagner_report(w.FS, LinearConnectionE(w.A, w.sc.Gamma), w.sc.scalar("f"), w.ev)
    r = max(v.max for v in rep.residuals.values())
    s, e = bundles["so3"], bundles["euclidean-tm"]
    cs, dfs = hbar_conservativity(s.FS, LinearConnectionE(s.A, s.sc.Gamma), parse_expr("x1", (1, 3)), s.ev)
    ce, dfe = hbar_conservativity(e.FS, LinearConnectionE(e.A, e.sc.Gamma), parse_expr("x1", (2, 2)), e.ev)
    ok = r <= 1e-7 and cs.max <= 1e-9 and dfs.max == 0.0 and ce.max > 1e-2 and dfe.max > 1e-2
    verdict(12, ok, f"Wagner (a)-(d) max {r:.2e} (<= 1e-7); h-bar conservative on so3 ({cs.max:.1e}), "
                    f"not on euclidean-tm ({ce.max:.2f})")


def test_criterion_13_derivative_engine(suites):
    recs = [c for s in suites.values() for c in s.checks if c.id.startswith("derivative.")]
    orders = {c.id.rsplit(".d", 1)[1] for c in recs}
    r = max(c.residual for c in recs)
    verdict(13, r <= 1e-4 and orders == {str(k) for k in range(1, 7)},
            f"{len(recs)} symbolic partials (orders 1-6) vs finite differences, max rel err {r:.2e} (<= 1e-4)")


def test_criterion_14_determinism(tmp_path):
    runner = CliRunner()
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        res = runner.invoke(main, ["identity-suite", "--scenario", "so3", "--out", str(path)])
        assert res.exit_code == 0, res.output
        outs.append(path.read_bytes())
    verdict(14, outs[0] == outs[1] and len(outs[0]) > 0,
            f"two identity-suite runs: {len(outs[0])} bytes, byte-identical = {outs[0] == outs[1]}")
