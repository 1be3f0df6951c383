"""Identity checks assembled into reports.

A :class:`Context` binds a scenario to its seeded sample points and lazily
builds the algebroid, Finsler structure, horizontal endomorphisms and linear
connection it declares.  Each ``*_checks`` function appends check records
(and optionally tensor dumps) to the context; :func:`run` maps CLI commands
onto these groups and returns a :class:`~liefinsler.report.Report`.

Every check compares two independently computed quantities (a closed form
against a definitional route) or tests a quantity that must vanish.
"""

from __future__ import annotations

from functools import cached_property
import numpy as np

from . import connections as cn
from . import finsler as fs
from . import horizontal as hz
from . import ichijyo as ij
from . import prolongation as pr
from .algebroid import LieAlgebroid, bracket_E, depends_on_fiber, lift_section
from .numeric import Residual, residual, values
from .report import CheckRecord, Report, TensorDump
from .sampling import random_coefficients, sample_points
from .scenario import Scenario, ScenarioError
from .symcalc import Evaluator, Expr, X, Y, asarray, build, diff_multi, esum, fd_oracle, to_string, zeros

CONNECTION_KINDS = ("berwald-type", "yano-type", "berwald", "cartan", "chern-rund", "hashiguchi", "ichijyo")
CLASSIFY_KINDS = ("generalized-berwald", "berwald", "minkowski", "wagner")
COMMANDS = (
    "verify-algebroid",
    "verify-finsler",
    "spray",
    "barthel",
    "endo-report",
    "connection",
    "douglas",
    "berwald-derivative",
    "classify",
    "identity-suite",
)

# fixed absolute thresholds for identities whose evaluation involves deep
# derivative chains or metric inverses
TOL_ALMOST_COMPLEX = 1e-10
TOL_CONSERVATIVE = 1e-8
TOL_SPRAY_ENDO = 1e-8
TOL_METRIC = 1e-7
TOL_PROJECTIVE = 1e-6
TOL_WAGNER = 1e-7
TOL_FD_REL = 1e-4


class Context:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.tol = sc.settings.tol
        self.sampling = sc.settings.sampling
        self.n, self.m = sc.n, sc.m
        self.x, self.y = sample_points(sc.m, sc.n, self.sampling)
        self.ev = Evaluator(self.x, self.y, max_condition=self.tol.max_condition)
        self.records: list[CheckRecord] = []
        self.dumps: list[TensorDump] = []

    # ---- lazily built objects ------------------------------------------------
    @cached_property
    def A(self) -> LieAlgebroid:
        return LieAlgebroid(self.m, self.n, self.sc.rho, self.sc.L, strict=False)

    @cached_property
    def FS(self) -> fs.FinslerStructure:
        self.sc.require("finsler")
        return fs.FinslerStructure(self.A, self.sc.F)

    @cached_property
    def h0(self) -> hz.HorizontalEndo:
        return fs.barthel(self.FS)

    @cached_property
    def S(self) -> np.ndarray:
        """The scenario's semispray, else the canonical spray."""
        if self.sc.semispray is not None:
            return pr.semispray(self.n, self.sc.semispray)
        return fs.canonical_spray(self.FS)

    @cached_property
    def hS(self) -> hz.HorizontalEndo:
        """Berwald endomorphism of the scenario spray."""
        return hz.from_semispray(self.A, self.S)

    @cached_property
    def h(self) -> hz.HorizontalEndo:
        """Scenario horizontal endomorphism; else the one generated by its semispray; else Barthel."""
        if self.sc.horizontal is not None:
            return hz.HorizontalEndo(self.A, self.sc.horizontal)
        if self.sc.semispray is not None:
            return self.hS
        if self.sc.F is not None:
            return self.h0
        raise ScenarioError(f"scenario {self.sc.name!r} declares no horizontal, semispray or finsler block")

    @cached_property
    def nabla(self) -> ij.LinearConnectionE:
        self.sc.require("connection")
        return ij.LinearConnectionE(self.A, self.sc.Gamma)

    # ---- recording -----------------------------------------------------------
    def record(self, cid: str, anchor: str, r: Residual, tol: float | None = None) -> CheckRecord:
        if tol is None:
            thr = self.tol.identity_abs + self.tol.identity_rel * r.scale
        else:
            thr = float(tol)
        rec = CheckRecord(cid, anchor, r.max, thr, bool(r.max <= thr))
        self.records.append(rec)
        return rec

    def check(self, cid: str, anchor: str, lhs, rhs=0, tol: float | None = None) -> CheckRecord:
        return self.record(cid, anchor, residual(lhs, rhs, self.ev), tol)

    def check_at_least(self, cid: str, anchor: str, lhs, bound: float) -> CheckRecord:
        """Negative check: passes when the residual of ``lhs = 0`` is at least ``bound``."""
        r = residual(lhs, 0, self.ev)
        rec = CheckRecord(cid, anchor, r.max, bound, bool(r.max >= bound))
        self.records.append(rec)
        return rec

    def dump(self, tid: str, labels, tensor) -> None:
        self.dumps.append(TensorDump(tid, tuple(labels), values(tensor, self.ev)))

    # ---- helpers -------------------------------------------------------------
    def random_section(self, stream: int, degree: int = 2) -> np.ndarray:
        """Seeded section of E with polynomial components in x."""
        m, n = self.m, self.n
        coef = random_coefficients((n, m, degree + 1), self.sampling.seed, stream)
        return build(
            (n,),
            lambda a: esum(
                float(coef[a, i, k]) * X(i) ** k if k else float(coef[a, i, 0]) / m
                for i in range(m)
                for k in range(degree + 1)
            ),
        )

    @property
    def homogeneous_h(self) -> bool:
        return residual(hz.tension_block(self.h), 0, self.ev).passes(self.tol)


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------


def algebroid_checks(ctx: Context) -> None:
    A = ctx.A
    ctx.check("algebroid.anchor_homomorphism", "structure equation: ρ[e_a,e_b] = [ρe_a, ρe_b]", A.structure_i())
    ctx.check("algebroid.jacobi", "structure equation: cyclic ρ∂L + LL = 0", A.structure_ii())
    ctx.check("algebroid.antisymmetry", "L^g_ab + L^g_ba = 0", A.antisymmetry_tensor())


def prolongation_checks(ctx: Context, pairs: int = 3) -> None:
    A, n = ctx.A, ctx.n
    for k in range(pairs):
        Xs, Ys = ctx.random_section(2 * k), ctx.random_section(2 * k + 1)
        XY = bracket_E(A, Xs, Ys)
        Xc, Yc = lift_section(A, Xs, "complete"), lift_section(A, Ys, "complete")
        Xv, Yv = lift_section(A, Xs, "vertical"), lift_section(A, Ys, "vertical")
        ctx.check(f"prolongation.complete_complete[{k}]", "[X^C, Y^C] = [X, Y]^C",
                  pr.bracket_prolong(A, Xc, Yc), lift_section(A, XY, "complete"))
        ctx.check(f"prolongation.complete_vertical[{k}]", "[X^C, Y^V] = [X, Y]^V",
                  pr.bracket_prolong(A, Xc, Yv), lift_section(A, XY, "vertical"))
        ctx.check(f"prolongation.vertical_vertical[{k}]", "[X^V, Y^V] = 0", pr.bracket_prolong(A, Xv, Yv))
    J = pr.vertical_endomorphism(n)
    ctx.check("prolongation.J_squared", "J∘J = 0", pr.compose(J, J))
    Jv = values(J, ctx.ev)
    ranks = np.array([np.linalg.matrix_rank(M) for M in Jv], dtype=float)
    ctx.record("prolongation.J_rank", "rank J = n", Residual(np.abs(ranks - n), float(n)), tol=0.0)
    ctx.check("prolongation.JJ_bracket", "[J, J] = 0 (Frölicher–Nijenhuis)", pr.fn_bracket_tensor(A, J, J))
    ctx.check("prolongation.JC_bracket", "[J, C] = J", pr.fn_bracket_section(A, J, pr.liouville(n)), J)


def finsler_checks(ctx: Context) -> None:
    FS, A, n, ev = ctx.FS, ctx.A, ctx.n, ctx.ev
    ctx.check("finsler.homogeneity", "y^a ∂F/∂y^a = 2F", pr.euler(n, FS.F), 2 * FS.F)
    Fv = values(FS.F, ev)
    ctx.record("finsler.positivity", "F > 0 off the zero section",
               Residual(np.maximum(0.0, -Fv), float(np.max(np.abs(Fv)))), tol=0.0)
    Gv = values(FS.G, ev)
    dets = np.abs(np.linalg.det(Gv))
    need = ctx.tol.det_rel * np.mean(np.abs(Gv), axis=(1, 2)) ** n
    ctx.record("finsler.regularity", "|det G| above the nondegeneracy threshold",
               Residual(np.maximum(0.0, need - dets), float(np.max(dets))), tol=0.0)
    w = fs.fundamental_form(FS)
    wd = fs.fundamental_form_definitional(FS)
    ctx.check("finsler.fundamental_form", "ω closed form = d(d_J F)", w, wd)
    J, C = pr.vertical_endomorphism(n), pr.liouville(n)
    ctx.check("finsler.iJ_omega", "i_J ω = 0", pr.interior_tensor(J, wd))
    ctx.check("finsler.lieC_omega", "£_C ω = ω", pr.lie_derivative_2form(A, C, wd), wd)
    ctx.check("finsler.iC_omega", "i_C ω = d_J F", pr.interior(C, wd), fs.d_J(FS))
    ctx.check("finsler.dF_metric", "∂F/∂y^g = y^l G_gl", FS.dF,
              build((n,), lambda g: esum(Y(l) * FS.G[g, l] for l in range(n))))
    Gt = fs.prolonged_metric(FS, ctx.h0)
    ctx.check("finsler.metric_liouville", "G̃(C, C) = 2F", pr.form_on(Gt, C, C), 2 * FS.F)
    P, _ = hz.adapted_frame(ctx.h0)
    ctx.check("finsler.metric_adapted", "G̃ = diag(G, G) in the adapted frame",
              pr.compose(pr.compose(P.T, Gt), P), fs.prolonged_metric_adapted(FS))
    ctx.check("finsler.kahler", "K_h = i_v ω for the Barthel endomorphism",
              fs.kahler_form(FS, ctx.h0), pr.interior_tensor(hz.vertical_projector(ctx.h0), w))
    phi = ctx.sc.scalars.get("phi", FS.F)
    ctx.check("finsler.gradient", "i_{grad φ} ω = d φ", *fs.exterior_check(FS, phi))
    f = ctx.sc.scalars.get("f")
    if f is not None and not depends_on_fiber(f):
        g = fs.gradient(FS, f)
        ctx.check("finsler.gradient_vertical", "grad f^∨ is vertical", g[:n])
        ctx.check("finsler.gradient_complete", "ρ_£(grad f^∨) F = f^c", *fs.complete_lift_check(FS, f))
    up, low = fs.first_cartan(FS)
    ctx.check("finsler.cartan_semispray", "i_S C = 0 for the first Cartan tensor",
              build((n, n), lambda g, b: esum(Y(a) * up[g, a, b] for a in range(n))))
    ctx.check("finsler.cartan_symmetric", "C_abg totally symmetric", low, np.transpose(low, (1, 2, 0)))


def spray_checks(ctx: Context) -> None:
    FS, A, n = ctx.FS, ctx.A, ctx.n
    S0 = fs.canonical_spray(FS)
    ctx.check("spray.semispray", "J S₀ = C", pr.semispray_defect(n, S0))
    ctx.check("spray.homogeneity", "S₀ homogeneous of degree 2", pr.spray_defect(n, S0))
    ctx.check("spray.energy", "i_{S₀} ω = −dF", pr.interior(S0, fs.fundamental_form_definitional(FS)),
              -pr.d_function(A, FS.F), tol=1e-8)
    ctx.dump("canonical_spray", ("A",), S0)
    if ctx.sc.semispray is not None:
        ctx.check("spray.scenario_semispray", "J S = C", pr.semispray_defect(n, ctx.S))
        ctx.dump("scenario_spray_defect", ("b",), pr.spray_defect(n, ctx.S))


def barthel_checks(ctx: Context) -> None:
    FS, h0 = ctx.FS, ctx.h0
    ctx.check("barthel.homogeneity", "tension of Barthel = 0", hz.tension_block(h0))
    ctx.check("barthel.torsion", "weak torsion of Barthel = 0", hz.weak_torsion_block(h0))
    ctx.check("barthel.strong_torsion", "strong torsion of Barthel = 0", hz.strong_torsion_block(h0))
    ctx.check("barthel.conservative", "ρ_a ∂F + B^b_a ∂F/∂y^b = 0", fs.conservativity_defect(FS, h0),
              tol=TOL_CONSERVATIVE)
    ctx.check("barthel.dHF", "d_H F = 0 for conservative h",
              fs.d_K(FS, hz.tension(h0)), tol=TOL_CONSERVATIVE)
    ctx.dump("barthel_B", ("b", "a"), h0.B)


def endo_checks(ctx: Context, h: hz.HorizontalEndo | None = None, tag: str = "endo") -> None:
    h = ctx.h if h is None else h
    A, n = ctx.A, ctx.n
    J, C = pr.vertical_endomorphism(n), pr.liouville(n)
    Hm, vm = hz.matrix(h), hz.vertical_projector(h)
    ctx.check(f"{tag}.projector", "h∘h = h", pr.compose(Hm, Hm), Hm)
    ctx.check(f"{tag}.kernel", "h∘J = 0 and J∘h = J", np.stack([pr.compose(Hm, J), pr.compose(J, Hm) - J]))
    ctx.check(f"{tag}.tension", "H = [h, C] closed form", hz.tension(h), pr.fn_bracket_section(A, Hm, C))
    ctx.check(f"{tag}.weak_torsion", "t = [J, h] closed form", hz.weak_torsion(h), pr.fn_bracket_tensor(A, J, Hm))
    S = hz.associated_semispray(h)
    ctx.check(f"{tag}.strong_torsion", "T = i_S t + H",
              hz.strong_torsion(h), pr.contract_first(S, hz.weak_torsion(h)) + hz.tension(h))
    omega_def = build((2 * n, 2 * n, 2 * n), lambda g, a, b: 0.0)
    for a in range(n):
        for b in range(n):
            br = pr.bracket_prolong(A, hz.delta(h, a), hz.delta(h, b))
            omega_def[:, a, b] = -pr.apply(vm, br)
    ctx.check(f"{tag}.curvature", "Ω(X_a, X_b) = −v[hX_a, hX_b]", hz.curvature(h), omega_def)
    Fm = hz.almost_complex(h)
    I = pr.identity(n)
    ctx.check(f"{tag}.almost_complex", "F² + Id = 0", pr.compose(Fm, Fm) + I, tol=TOL_ALMOST_COMPLEX)
    ctx.check(f"{tag}.FJ", "F∘J = h", pr.compose(Fm, J), Hm, tol=TOL_ALMOST_COMPLEX)
    ctx.check(f"{tag}.Fh", "F∘h = −J", pr.compose(Fm, Hm), -J, tol=TOL_ALMOST_COMPLEX)
    ctx.check(f"{tag}.JF", "J∘F = v", pr.compose(J, Fm), vm, tol=TOL_ALMOST_COMPLEX)
    ctx.check(f"{tag}.Fv", "F∘v = h∘F", pr.compose(Fm, vm), pr.compose(Hm, Fm), tol=TOL_ALMOST_COMPLEX)
    P, Q = hz.adapted_frame(h)
    ctx.check(f"{tag}.adapted_frame", "P P⁻¹ = Id", pr.compose(P, Q), I)
    if ctx.homogeneous_h if h is ctx.h else residual(hz.tension_block(h), 0, ctx.ev).passes(ctx.tol):
        ctx.check(f"{tag}.spray_endo", "h_S = h − ½ i_S t for homogeneous h",
                  hz.from_semispray(A, S).B, hz.spray_endo_prediction(h), tol=TOL_SPRAY_ENDO)


def endo_dumps(ctx: Context) -> None:
    h = ctx.h
    ctx.dump("B", ("b", "a"), h.B)
    ctx.dump("tension", ("b", "a"), hz.tension_block(h))
    ctx.dump("weak_torsion", ("g", "a", "b"), hz.weak_torsion_block(h))
    ctx.dump("strong_torsion", ("b", "a"), hz.strong_torsion_block(h))
    ctx.dump("curvature_R", ("g", "a", "b"), hz.curvature_coefficients(h))
    ctx.dump("almost_complex", ("A", "B"), hz.almost_complex(h))


# ---- connections ---------------------------------------------------------------


def build_connection(ctx: Context, kind: str) -> cn.DConnection:
    if kind == "berwald-type":
        return cn.berwald_type(ctx.h)
    if kind == "yano-type":
        return cn.yano_type(ctx.h)
    if kind == "ichijyo":
        return ij.ichijyo_connection(ctx.FS, ctx.nabla)
    if kind in ("berwald", "cartan", "chern-rund", "hashiguchi"):
        return fs.distinguished_connection(ctx.FS, kind.replace("-", "_"), ctx.h0)
    raise ScenarioError(f"unknown connection kind {kind!r}; expected one of {', '.join(CONNECTION_KINDS)}")


def _torsion_checks(ctx: Context, D: cn.DConnection, tag: str) -> None:
    closed = cn.torsion_components(D)
    dfn = cn.torsion_components_definitional(D)
    for k in ("A", "B", "R1", "P1", "S1"):
        ctx.check(f"{tag}.torsion_{k}", f"torsion component {k}: closed form = definitional", closed[k], dfn[k])


def _curvature_checks(ctx: Context, D: cn.DConnection, tag: str, blocks=None) -> tuple:
    R, P, S = cn.curvature_components(D) if blocks is None else blocks
    n = ctx.n
    for name, T in (("R", R), ("P", P), ("S", S)):
        oracle = zeros(n, n, n, n)
        for a in range(n):
            for b in range(n):
                for g in range(n):
                    oracle[:, a, b, g] = cn.curvature_definitional(D, name, a, b, g)
        ctx.check(f"{tag}.curvature_{name}", f"{name} coefficients = K(·,·)V definitional", T, oracle)
    return R, P, S


def connection_checks(ctx: Context, kind: str, torsion: bool = False, curvature: bool = False,
                      ricci: bool = False) -> None:
    D = build_connection(ctx, kind)
    n = ctx.n
    tag = f"connection.{kind}"
    ctx.dump(f"{kind}.F", ("g", "a", "b"), D.F)
    ctx.dump(f"{kind}.C", ("g", "a", "b"), D.C)
    for a in range(2 * n):
        ctx.check(f"{tag}.DJ[{a}]", "D J = 0", cn.dconnection_J_defect(D, pr.frame_section(n, a)))
    if torsion:
        _torsion_checks(ctx, D, tag)
    blocks = None
    if curvature:
        blocks = _curvature_checks(ctx, D, tag)
    if ricci:
        ctx.dump(f"{kind}.mixed_ricci", ("a", "g"), cn.mixed_ricci(D, None if blocks is None else blocks[1]))
    _kind_checks(ctx, kind, D, blocks)


def _kind_checks(ctx: Context, kind: str, D: cn.DConnection, blocks) -> None:
    n, h, tag = ctx.n, D.h, f"connection.{kind}"
    if kind == "berwald-type":
        ctx.check(f"{tag}.deflection", "h-deflection = tension", cn.h_deflection(D), hz.tension_block(h))
        T = cn.torsion_tensor(D)
        ctx.check(f"{tag}.torsion_F_t", "T = F∘t + Ω", T, cn.almost_complex_torsion_prediction(D), tol=1e-8)
        R, P, S = cn.curvature_components(D) if blocks is None else blocks
        ctx.check(f"{tag}.vertical_curvature", "S = 0", S)
        ctx.check(f"{tag}.P_symmetric_last", "P^l_abg = P^l_agb", P, np.transpose(P, (0, 1, 3, 2)))
        if ctx.homogeneous_h:
            ctx.check(f"{tag}.P_degree", "y^m ∂P/∂y^m + P = 0", cn.v_derivative_along_delta(n, P) + P, tol=1e-8)
            if residual(hz.weak_torsion_block(h), 0, ctx.ev).passes(ctx.tol):
                ctx.check(f"{tag}.P_symmetric", "P totally symmetric when t = 0", P,
                          np.transpose(P, (0, 2, 1, 3)), tol=1e-8)
                ctx.check(f"{tag}.iS_P", "i_S P = 0", cn.contract_semispray_first(D, P))
    elif kind == "yano-type":
        B = cn.berwald_type(h)
        Pb = cn.curvature_components(B)[1]
        R, P, S = cn.curvature_components(D) if blocks is None else blocks
        ctx.check(f"{tag}.mixed_closed", "Yano mixed curvature closed form", P, cn.yano_mixed_curvature(h))
        ctx.check(f"{tag}.vertical_curvature", "S = 0", S)
        ctx.check(f"{tag}.ricci", "P̃_ric = 2/(n+1) P_ric", cn.mixed_ricci(D, P),
                  (2.0 / (n + 1)) * cn.mixed_ricci(B, Pb), tol=1e-8)
    elif kind == "cartan":
        hp, vp = fs.metricity(D, ctx.FS)
        ctx.check(f"{tag}.metric", "D G̃ = 0 (full metricity)", np.stack([hp, vp]), tol=TOL_METRIC)
    elif kind == "chern-rund":
        ctx.check(f"{tag}.h_metric", "D_h G̃ = 0", fs.metricity(D, ctx.FS)[0], tol=TOL_METRIC)
    elif kind == "hashiguchi":
        ctx.check(f"{tag}.v_metric", "D_v G̃ = 0", fs.metricity(D, ctx.FS)[1], tol=TOL_METRIC)
    elif kind == "berwald":
        ctx.check(f"{tag}.deflection", "h-deflection = 0", cn.h_deflection(D))
        ctx.check(f"{tag}.h_torsion", "h-horizontal torsion = 0", cn.torsion_components(D)["A"])
    elif kind == "ichijyo":
        FS, nab = ctx.FS, ctx.nabla
        closed = cn.torsion_components(D)
        pred = ij.ichijyo_torsion_prediction(FS, nab)
        for k in ("A", "B", "R1", "P1", "S1"):
            ctx.check(f"{tag}.torsion_{k}", f"Ichijyō torsion {k} from ∇, h_∇ and C", closed[k], pred[k])
        gen = cn.curvature_components(D) if blocks is None else blocks
        for name, a, b in zip("RPS", gen, ij.ichijyo_curvature_closed(FS, nab)):
            ctx.check(f"{tag}.curvature_{name}", f"Ichijyō {name} closed form", a, b)


def distinguished_checks(ctx: Context) -> None:
    """Metricity trio and the coincidence on Riemannian-flat data."""
    for kind in ("cartan", "chern-rund", "hashiguchi"):
        _kind_checks(ctx, kind, build_connection(ctx, kind), None)
    conns = [build_connection(ctx, k) for k in ("berwald", "cartan", "chern-rund", "hashiguchi")]
    first_cartan_zero = residual(fs.first_cartan(ctx.FS)[0], 0, ctx.ev).passes(ctx.tol)
    if first_cartan_zero:
        cartan_h = fs.cartan_horizontal_coefficients(ctx.FS, ctx.h0)
        if residual(cartan_h, conns[0].F, ctx.ev).passes(ctx.tol):
            ctx.check("connection.coincide", "Berwald, Cartan, Chern–Rund, Hashiguchi coincide",
                      np.stack([np.stack([c.F, c.C]) for c in conns[1:]]),
                      np.stack([np.stack([conns[0].F, conns[0].C])] * 3))


def douglas_checks(ctx: Context, projective: Expr | None = None) -> None:
    h = ctx.hS
    Dg = cn.douglas_tensor(h)
    iS, ric = cn.douglas_contractions(h, Dg)
    ctx.check("douglas.symmetric_12", "D^l_abg = D^l_bag", Dg, np.transpose(Dg, (0, 2, 1, 3)))
    ctx.check("douglas.symmetric_13", "D^l_abg = D^l_gba", Dg, np.transpose(Dg, (0, 3, 2, 1)))
    ctx.check("douglas.iS", "i_S D = 0", iS)
    ctx.check("douglas.ricci", "D_ric = 0", ric)
    if projective is not None:
        S2 = pr.projective_change(ctx.n, ctx.S, projective)
        D2 = cn.douglas_tensor(hz.from_semispray(ctx.A, S2))
        ctx.check("douglas.projective", "D invariant under S ↦ S + f̃ C", Dg, D2, tol=TOL_PROJECTIVE)
    ctx.dump("douglas", ("l", "a", "b", "g"), Dg)


def berwald_derivative_checks(ctx: Context) -> None:
    h, n = ctx.h, ctx.n
    Dp = cn.berwald_derivative(h)
    T = cn.pullback_torsions(Dp)
    ctx.check("berwald_derivative.A", "Å = t", T["A"], hz.weak_torsion_block(h))
    ctx.check("berwald_derivative.R1", "R̊¹ = Ω", T["R1"], -hz.curvature_coefficients(h))
    ctx.check("berwald_derivative.B_P1_Q1", "B̊ = P̊¹ = Q̊¹ = 0", np.stack([T["B"], T["P1"], T["Q1"]]))
    Bt = cn.berwald_type(h)
    blocks = cn.curvature_components(Bt)
    for name, closed in zip("RPS", blocks):
        oracle = zeros(n, n, n, n)
        for a in range(n):
            for b in range(n):
                for g in range(n):
                    oracle[:, a, b, g] = cn.pullback_curvature_definitional(Dp, name, a, b, g)
        ctx.check(f"berwald_derivative.curvature_{name}", f"{name}̊ = Berwald-type {name}", oracle, closed)
    P = blocks[1]
    lhs = zeros(n, n, n, n)
    for a in range(n):
        for b in range(n):
            inner = pr.bracket_prolong(ctx.A, hz.delta(h, a), pr.frame_section(n, n + b))
            for g in range(n):
                lhs[:, a, b, g] = Dp.Vbar(pr.bracket_prolong(ctx.A, inner, pr.frame_section(n, n + g)))
    ctx.check("berwald_derivative.P_bracket", "P̊(X,Y)Z = V̄[[X^h, Y^V], Z^V]", lhs, P)
    Yd = cn.yano_derivative(h)
    ctx.check("yano_derivative.F", "Yano derivative δ-coefficients = Yano-type F", Yd.Fh, cn.yano_type(h).F)
    e = [asarray([1.0 if k == b else 0.0 for k in range(n)]) for b in range(n)]
    Dv = np.stack([np.stack([Yd.derivative(pr.frame_section(n, n + a), e[b]) for b in range(n)]) for a in range(n)])
    ctx.check("yano_derivative.vertical", "D_{V_a} ê_b = 0", Dv)
    phi = ctx.sc.scalars.get("phi", ctx.sc.F)
    if phi is not None:
        Hs = cn.hessian(n, phi)
        ctx.check("hessian.lifts", "∇^v∇^v f̃ = ρ(X^V)ρ(Y^V) f̃", Hs, cn.hessian_by_lifts(ctx.A, phi))
        ctx.check("hessian.symmetric", "hessian symmetric", Hs, Hs.T)


# ---- Ichijyō / classification -----------------------------------------------------


def _gb_checks(ctx: Context, nabla=None, tag: str = "classify") -> ij.GeneralizedBerwaldReport:
    nabla = ctx.nabla if nabla is None else nabla
    gb = ij.generalized_berwald_report(ctx.FS, nabla, ctx.ev, ctx.tol)
    ctx.records.append(CheckRecord(
        f"{tag}.berwald_conditions_agree",
        "h_∇ conservative ⇔ C̃ = 0 ⇔ Ichijyō h-metrical (all agree)",
        float(max(gb.conservativity.max, gb.second_cartan.max, gb.h_metricity.max)) if gb.generalized_berwald
        else float(min(gb.conservativity.max, gb.second_cartan.max, gb.h_metricity.max)),
        ctx.tol.identity_abs, gb.agree))
    return gb


def classify_checks(ctx: Context, kind: str, function: str = "f") -> None:
    if kind not in CLASSIFY_KINDS:
        raise ScenarioError(f"unknown classification {kind!r}; expected one of {', '.join(CLASSIFY_KINDS)}")
    gb = _gb_checks(ctx)
    for name, r in (("conservative", gb.conservativity), ("second_cartan", gb.second_cartan),
                    ("h_metric", gb.h_metricity)):
        ctx.record(f"classify.{name}", f"generalized Berwald condition: {name}", r)
    if kind in ("berwald", "minkowski"):
        ctx.check("classify.torsion_free", "T_∇ = 0", ctx.nabla.torsion())
        ctx.check("classify.barthel", "h_∇ = Barthel", ij.h_from_nabla(ctx.nabla).B, ctx.h0.B)
        ctx.check("classify.hashiguchi_ichijyo", "Hashiguchi = Ichijyō",
                  np.stack([build_connection(ctx, "hashiguchi").F, build_connection(ctx, "hashiguchi").C]),
                  np.stack([ctx.nabla.Gamma, fs.first_cartan(ctx.FS)[0]]))
    if kind == "minkowski":
        ctx.check("classify.flat", "K_∇ = 0", ctx.nabla.curvature())
    if kind == "wagner":
        f = ctx.sc.scalar(function)
        rep = ij.wagner_report(ctx.FS, ctx.nabla, f, ctx.ev, ctx.tol)
        for k, r in rep.residuals.items():
            anchor = {
                "a": "Wagner (a): A = d f^∨ ∧ h_∇",
                "b": "Wagner (b): T_∇(X,Y) = df(X)Y − df(Y)X",
                "c": "Wagner (c): h_∇ = h₀ + f^c J − F[J, grad f^∨] − d_J F ⊗ grad f^∨",
                "d": "Wagner (d): S_∇ = S₀ + f^c C − 2F grad f^∨",
            }[k]
            ctx.record(f"classify.wagner_{k}", anchor, r, tol=TOL_WAGNER)
    ctx.dump("h_nabla_B", ("b", "a"), ij.h_from_nabla(ctx.nabla).B)


def ichijyo_checks(ctx: Context) -> None:
    nab, n = ctx.nabla, ctx.n
    lhs, rhs = ij.nabla_curvature_relation(nab)
    ctx.check("ichijyo.curvature_relation", "y^g K^l_abg = −R^l_ab", lhs, rhs)
    vl = [ij.vertical_lift_check(nab, a, b) for a in range(n) for b in range(n)]
    ctx.check("ichijyo.vertical_lift", "(∇_X Y)^V = [X^{h_∇}, Y^V]",
              np.stack([v[0] for v in vl]), np.stack([v[1] for v in vl]))
    gb = _gb_checks(ctx, tag="ichijyo")
    D = ij.ichijyo_connection(ctx.FS, nab)
    if gb.generalized_berwald:
        ctx.check("ichijyo.mixed_curvature", "Ichijyō P = 0 for generalized Berwald data",
                  cn.curvature_components(D)[1], tol=1e-8)
    hb = ij.is_h_basic(D, ctx.ev, ctx.tol)
    ctx.record("ichijyo.h_basic", "Ichijyō connection is h-basic", hb.residual)
    dd = [ij.deflection_difference(D, nab, a) for a in range(n)]
    ctx.check("ichijyo.deflection", "D_{X^h} C = X^h − X^{h_∇}", np.stack([d[0] for d in dd]),
              np.stack([d[1] for d in dd]))


# ---- derivative engine ------------------------------------------------------------


def derivative_fields(ctx: Context) -> list[tuple[str, Expr]]:
    sc = ctx.sc
    out = []
    if sc.F is not None:
        out.append(("F", sc.F))
    for k in sorted(sc.scalars):
        out.append((f"scalar:{k}", sc.scalars[k]))
    for name, T in (("rho", sc.rho), ("L", sc.L), ("Gamma", sc.Gamma)):
        if T is None:
            continue
        for idx in np.ndindex(T.shape):
            e = T[idx]
            if e.varmask:
                out.append((f"{name}[{','.join(str(i + 1) for i in idx)}]", e))
    return out


def derivative_checks(ctx: Context, max_order: int = 6, points: int = 3) -> None:
    """Symbolic partials against the finite-difference oracle (order ≤ 3 directly,
    higher orders by differencing a symbolic intermediate)."""
    m, n = ctx.m, ctx.n
    vars_all = [X(i) for i in range(m)] + [Y(a) for a in range(n)]
    rng = np.random.default_rng([ctx.sampling.seed, 77])
    P = min(points, len(ctx.x))
    for fname, f in derivative_fields(ctx):
        for order in range(1, max_order + 1):
            mi = [vars_all[int(k)] for k in rng.integers(0, len(vars_all), size=order)]
            sym = diff_multi(f, mi)
            head, tail = mi[: max(0, order - 3)], mi[max(0, order - 3):]
            base = diff_multi(f, head) if head else f
            sv = values(sym, ctx.ev)[:P]
            fdv = np.array([fd_oracle(base, ctx.x[p], ctx.y[p], tail) for p in range(P)])
            rel = np.abs(sv - fdv) / np.maximum(np.abs(sv), 1.0)
            label = "".join(to_string(v) for v in mi)
            ctx.record(f"derivative.{fname}.d{order}", f"∂^{order}/∂{label}: symbolic = finite difference",
                       Residual(rel, float(np.max(np.abs(sv)))), tol=TOL_FD_REL)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def identity_suite(ctx: Context) -> None:
    algebroid_checks(ctx)
    prolongation_checks(ctx)
    if ctx.sc.F is not None:
        finsler_checks(ctx)
        spray_checks(ctx)
        barthel_checks(ctx)
        endo_checks(ctx, ctx.h0, tag="barthel_endo")
        for kind in ("berwald-type", "yano-type"):
            D = build_connection(ctx, kind)
            _kind_checks(ctx, kind, D, None)
        _torsion_checks(ctx, build_connection(ctx, "berwald-type"), "connection.berwald-type")
        douglas_checks(ctx)
        distinguished_checks(ctx)
        berwald_derivative_checks(ctx)
        if ctx.sc.Gamma is not None:
            ichijyo_checks(ctx)
    elif ctx.sc.horizontal is not None or ctx.sc.semispray is not None:
        endo_checks(ctx)
    derivative_checks(ctx)
    ctx.dumps.clear()


def run(command: str, sc: Scenario, **opts) -> Report:
    """Execute a command on a scenario and assemble its report."""
    if command not in COMMANDS:
        raise ScenarioError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    ctx = Context(sc)
    if command == "verify-algebroid":
        algebroid_checks(ctx)
        ctx.dump("rho", ("i", "a"), ctx.A.rho)
        ctx.dump("L", ("g", "a", "b"), ctx.A.L)
    elif command == "verify-finsler":
        sc.require("finsler")
        finsler_checks(ctx)
        ctx.dump("G", ("a", "b"), ctx.FS.G)
    elif command == "spray":
        sc.require("finsler")
        spray_checks(ctx)
    elif command == "barthel":
        sc.require("finsler")
        barthel_checks(ctx)
    elif command == "endo-report":
        endo_checks(ctx)
        endo_dumps(ctx)
    elif command == "connection":
        connection_checks(ctx, opts.get("kind") or "berwald-type", bool(opts.get("torsion")),
                          bool(opts.get("curvature")), bool(opts.get("ricci")))
    elif command == "douglas":
        proj = opts.get("projective")
        if isinstance(proj, str):
            proj = sc.scalars[proj] if proj in sc.scalars else sc.parse(proj, "--projective")
        douglas_checks(ctx, proj)
    elif command == "berwald-derivative":
        berwald_derivative_checks(ctx)
    elif command == "classify":
        sc.require("finsler", "connection")
        classify_checks(ctx, opts.get("kind") or "generalized-berwald", opts.get("function") or "f")
    elif command == "identity-suite":
        identity_suite(ctx)
    options = {k: v for k, v in opts.items() if v is not None and v is not False}
    return Report(sc.name, command, ctx.sampling.seed, ctx.x, ctx.y, ctx.records, ctx.dumps, options)


__all__ = [
    "COMMANDS",
    "CONNECTION_KINDS",
    "CLASSIFY_KINDS",
    "Context",
    "run",
]
