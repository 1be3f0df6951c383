"""Scenario files: sectioned key/value text describing one test configuration.

Example::

    [scenario]
    name = euclidean-tm
    m = 2
    n = 2

    [algebroid]
    rho.1.1 = "1"
    rho.2.2 = "1"

    [finsler]
    F = "0.5*(y1^2+y2^2)"

Index-mapped keys are one-based: ``rho.i.a`` = ρ^i_a, ``L.g.a.b`` = L^g_{ab},
``S.a`` = S^a, ``B.b.a`` = B^b_a, ``Gamma.g.a.b`` = Γ^g_{ab}.  Omitted
components are zero.  Expression values may be quoted.  Optional sections:
``finsler``, ``semispray``, ``horizontal``, ``connection``, ``scalars``,
``sampling`` (``seed``, ``points``, ``box``, ``y_norm``) and ``tolerances``
(``identity``, ``identity_abs``, ``identity_rel``, ``fd_rel``).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .config import DEFAULT, Sampling, Settings, Tolerances
from .symcalc import Expr, ParseError, parse_expr, zeros

FIXTURES = ("euclidean-tm", "so3", "conformal-tm", "quartic-finsler", "broken-jacobi")


class ScenarioError(ValueError):
    """A scenario file is malformed, inconsistent, or lacks a required block."""


class ScenarioParseError(ScenarioError):
    """An expression in a scenario failed to parse; names the offending field."""

    def __init__(self, section: str, key: str, err: ParseError):
        self.section, self.key, self.offset = section, key, err.offset
        super().__init__(f"[{section}] {key}: {err}")


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    m: int
    n: int
    rho: np.ndarray
    L: np.ndarray
    F: Expr | None = None
    semispray: np.ndarray | None = None
    horizontal: np.ndarray | None = None
    Gamma: np.ndarray | None = None
    scalars: dict[str, Expr] = field(default_factory=dict)
    settings: Settings = DEFAULT
    source: dict[str, dict[str, str]] = field(default_factory=dict, repr=False)

    def require(self, *blocks: str) -> None:
        missing = [b for b in blocks if getattr(self, _BLOCK_ATTR[b]) is None]
        if missing:
            raise ScenarioError(f"scenario {self.name!r} lacks required block(s): {', '.join(missing)}")

    def scalar(self, name: str) -> Expr:
        if name not in self.scalars:
            raise ScenarioError(f"scenario {self.name!r} has no scalar {name!r}")
        return self.scalars[name]

    def parse(self, text: str, what: str = "expression") -> Expr:
        try:
            return parse_expr(text, (self.m, self.n))
        except ParseError as exc:
            raise ScenarioParseError("cli", what, exc) from None


_BLOCK_ATTR = {
    "finsler": "F",
    "semispray": "semispray",
    "horizontal": "horizontal",
    "connection": "Gamma",
}


def _strip(value: str) -> str:
    v = value.strip()
    if len(v) >= 2 and v[0] == v[-1] and v[0] in "\"'":
        v = v[1:-1]
    return v


def _indexed(section: str, items, prefix: str, shape: tuple[int, ...], dims) -> np.ndarray:
    out = zeros(*shape)
    for key, raw in items:
        parts = key.split(".")
        if parts[0] != prefix:
            raise ScenarioError(f"[{section}] unexpected key {key!r}; expected {prefix}.<indices>")
        try:
            idx = tuple(int(p) - 1 for p in parts[1:])
        except ValueError:
            raise ScenarioError(f"[{section}] {key}: indices must be integers") from None
        if len(idx) != len(shape) or any(not 0 <= i < s for i, s in zip(idx, shape)):
            raise ScenarioError(f"[{section}] {key}: index out of range for shape {shape}")
        try:
            out[idx] = parse_expr(_strip(raw), dims)
        except ParseError as exc:
            raise ScenarioParseError(section, key, exc) from None
    return out


def _pair(section: str, key: str, raw: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in _strip(raw).split(","))
    except ValueError:
        raise ScenarioError(f"[{section}] {key}: expected two comma-separated numbers") from None
    if not lo < hi:
        raise ScenarioError(f"[{section}] {key}: lower bound must be below upper bound")
    return lo, hi


def loads(text: str, origin: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case (L vs l, Gamma)
    try:
        cp.read_string(text, source=origin)
    except configparser.Error as exc:
        raise ScenarioError(f"{origin}: {exc}") from None
    known = {"scenario", "algebroid", "finsler", "semispray", "horizontal", "connection", "scalars", "sampling",
             "tolerances"}
    for sec in cp.sections():
        if sec not in known:
            raise ScenarioError(f"{origin}: unknown section [{sec}]")
    for sec in ("scenario", "algebroid"):
        if not cp.has_section(sec):
            raise ScenarioError(f"{origin}: missing required section [{sec}]")
    head = cp["scenario"]
    try:
        name = _strip(head.get("name", Path(origin).stem))
        m, n = int(head["m"]), int(head["n"])
    except (KeyError, ValueError):
        raise ScenarioError(f"{origin}: [scenario] needs integer m and n") from None
    if m < 1 or n < 1:
        raise ScenarioError(f"{origin}: dimensions must be positive (m={m}, n={n})")
    dims = (m, n)

    alg = cp["algebroid"]
    rho = _indexed("algebroid", [(k, v) for k, v in alg.items() if k.startswith("rho.")], "rho", (m, n), dims)
    L = _indexed("algebroid", [(k, v) for k, v in alg.items() if k.startswith("L.")], "L", (n, n, n), dims)
    for k in alg:
        if not (k.startswith("rho.") or k.startswith("L.")):
            raise ScenarioError(f"[algebroid] unexpected key {k!r}")

    F = None
    if cp.has_section("finsler"):
        fin = cp["finsler"]
        if "F" not in fin:
            raise ScenarioError("[finsler] requires key F")
        try:
            F = parse_expr(_strip(fin["F"]), dims)
        except ParseError as exc:
            raise ScenarioParseError("finsler", "F", exc) from None

    semispray = horizontal = Gamma = None
    if cp.has_section("semispray"):
        semispray = _indexed("semispray", cp["semispray"].items(), "S", (n,), dims)
    if cp.has_section("horizontal"):
        horizontal = _indexed("horizontal", cp["horizontal"].items(), "B", (n, n), dims)
    if cp.has_section("connection"):
        Gamma = _indexed("connection", cp["connection"].items(), "Gamma", (n, n, n), dims)

    scalars: dict[str, Expr] = {}
    if cp.has_section("scalars"):
        for k, v in cp["scalars"].items():
            try:
                scalars[k] = parse_expr(_strip(v), dims)
            except ParseError as exc:
                raise ScenarioParseError("scalars", k, exc) from None

    sampling, tol = Sampling(), Tolerances()
    if cp.has_section("sampling"):
        s = cp["sampling"]
        kw = {}
        for k, v in s.items():
            if k == "seed":
                kw["seed"] = int(_strip(v))
            elif k == "points":
                kw["points"] = int(_strip(v))
            elif k in ("box", "y_norm"):
                kw[k] = _pair("sampling", k, v)
            else:
                raise ScenarioError(f"[sampling] unexpected key {k!r}")
        sampling = replace(sampling, **kw)
        if sampling.points < 1:
            raise ScenarioError("[sampling] points must be positive")
    if cp.has_section("tolerances"):
        for k, v in cp["tolerances"].items():
            val = float(_strip(v))
            if k == "identity":
                tol = tol.with_identity(val)
            elif k in ("identity_abs", "identity_rel", "fd_rel", "max_condition", "det_rel"):
                tol = replace(tol, **{k: val})
            else:
                raise ScenarioError(f"[tolerances] unexpected key {k!r}")

    source = {sec: dict(cp[sec].items()) for sec in cp.sections()}
    return Scenario(name, m, n, rho, L, F, semispray, horizontal, Gamma, scalars,
                    Settings(tol=tol, sampling=sampling), source)


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file, or a bundled fixture when ``path`` names one."""
    p = Path(path)
    if not p.exists() and str(path) in FIXTURES:
        return load_fixture(str(path))
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}") from None
    return loads(text, str(p))


def fixture_path(name: str):
    return resources.files("liefinsler.fixtures").joinpath(f"{name}.scn")


def load_fixture(name: str) -> Scenario:
    if name not in FIXTURES:
        raise ScenarioError(f"unknown fixture {name!r}; bundled: {', '.join(FIXTURES)}")
    return loads(fixture_path(name).read_text(encoding="utf-8"), f"{name}.scn")


def with_overrides(sc: Scenario, seed: int | None = None, points: int | None = None,
                   tol: float | None = None) -> Scenario:
    """Scenario with sampling/tolerance overrides (CLI flags, environment)."""
    s = sc.settings
    samp = s.sampling
    if seed is not None:
        samp = replace(samp, seed=seed)
    if points is not None:
        samp = replace(samp, points=points)
    t = s.tol if tol is None else s.tol.with_identity(tol)
    return replace(sc, settings=Settings(tol=t, sampling=samp))
