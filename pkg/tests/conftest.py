from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from liefinsler.algebroid import LieAlgebroid
from liefinsler.finsler import FinslerStructure
from liefinsler.numeric import residual
from liefinsler.sampling import sample_points
from liefinsler.scenario import load_fixture, load_scenario
from liefinsler.symcalc import Evaluator

ROOT = Path(__file__).resolve().parents[1]
WAGNER_SCENARIO = ROOT / "scenarios" / "wagner-e1.scn"
FINSLER_FIXTURES = ("euclidean-tm", "so3", "conformal-tm", "quartic-finsler")


class Bundle:
    """A fixture with its algebroid, Finsler structure and evaluator."""

    def __init__(self, sc):
        self.sc = sc
        self.A = LieAlgebroid(sc.m, sc.n, sc.rho, sc.L, strict=False)
        self.FS = FinslerStructure(self.A, sc.F) if sc.F is not None else None
        self.x, self.y = sample_points(sc.m, sc.n, sc.settings.sampling)
        self.ev = Evaluator(self.x, self.y)

    def res(self, lhs, rhs=0) -> float:
        return residual(lhs, rhs, self.ev).max


@pytest.fixture(scope="session")
def bundles() -> dict[str, Bundle]:
    out = {name: Bundle(load_fixture(name)) for name in (*FINSLER_FIXTURES, "broken-jacobi")}
    out["wagner-e1"] = Bundle(load_scenario(WAGNER_SCENARIO))
    return out


@pytest.fixture(params=FINSLER_FIXTURES)
def finsler_bundle(request, bundles) -> Bundle:
    return bundles[request.param]


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)), initial=0.0) <= tol


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, detail = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")
