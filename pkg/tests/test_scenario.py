from __future__ import annotations

import pytest

from liefinsler.scenario import (
    FIXTURES,
    ScenarioError,
    ScenarioParseError,
    load_fixture,
    load_scenario,
    loads,
    with_overrides,
)

MINIMAL = """
[scenario]
name = tiny
m = 1
n = 1

[algebroid]
rho.1.1 = "1"
"""


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_load(name):
    sc = load_fixture(name)
    assert sc.name == name
    assert sc.rho.shape == (sc.m, sc.n) and sc.L.shape == (sc.n,) * 3
    assert sc.settings.sampling.seed == 42 and sc.settings.sampling.points == 8


def test_load_by_path_or_name(tmp_path):
    p = tmp_path / "tiny.scn"
    p.write_text(MINIMAL)
    assert load_scenario(p).name == "tiny"
    assert load_scenario("so3").n == 3
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "missing.scn")
    with pytest.raises(ScenarioError, match="unknown fixture"):
        load_fixture("nope")


def test_omitted_components_are_zero():
    sc = loads(MINIMAL)
    assert sc.L[0, 0, 0].is_zero and sc.F is None and sc.Gamma is None


@pytest.mark.parametrize("text, match", [
    ("[algebroid]\n", "missing required section"),
    (MINIMAL + "[bogus]\n", "unknown section"),
    (MINIMAL.replace("m = 1", "m = x"), "integer m and n"),
    (MINIMAL.replace("m = 1", "m = 0"), "dimensions must be positive"),
    (MINIMAL.replace("rho.1.1", "rho.2.1"), "index out of range"),
    (MINIMAL.replace("rho.1.1", "rho.a.1"), "must be integers"),
    (MINIMAL + "[finsler]\nG = \"1\"\n", "requires key F"),
    (MINIMAL + "[sampling]\npoints = 0\n", "points must be positive"),
    (MINIMAL + "[sampling]\nbox = 1, -1\n", "lower bound"),
    (MINIMAL + "[sampling]\ncolour = red\n", "unexpected key"),
    (MINIMAL + "[tolerances]\nloose = 1\n", "unexpected key"),
])
def test_malformed_scenarios(text, match):
    with pytest.raises(ScenarioError, match=match):
        loads(text)


def test_parse_error_names_field_and_offset():
    with pytest.raises(ScenarioParseError) as info:
        loads(MINIMAL + '[finsler]\nF = "0.5*(y1^2 +)"\n')
    err = info.value
    assert (err.section, err.key, err.offset) == ("finsler", "F", 11)


def test_require_blocks():
    sc = loads(MINIMAL)
    with pytest.raises(ScenarioError, match="finsler, connection"):
        sc.require("finsler", "connection")
    with pytest.raises(ScenarioError, match="no scalar"):
        sc.scalar("f")


def test_overrides():
    sc = with_overrides(load_fixture("so3"), seed=7, points=3, tol=1e-6)
    assert sc.settings.sampling.seed == 7 and sc.settings.sampling.points == 3
    assert sc.settings.tol.identity_abs == sc.settings.tol.identity_rel == 1e-6
    assert with_overrides(sc).settings == sc.settings


def test_tolerance_section():
    sc = loads(MINIMAL + "[tolerances]\nidentity = 1e-5\nfd_rel = 1e-3\n")
    assert sc.settings.tol.identity_abs == 1e-5 and sc.settings.tol.fd_rel == 1e-3
