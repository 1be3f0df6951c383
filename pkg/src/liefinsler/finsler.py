"""Finsler structures on Lie algebroids.

A Finsler function ``F(x, y)`` (homogeneous of degree 2 in ``y``, positive and
regular off the zero section) determines the metric ``G_ab = ∂²F/∂y^a∂y^b``,
the fundamental 2-form ``ω = d(d_J F)`` on the prolongation, the canonical
spray, the Barthel endomorphism, the Cartan tensors and the classical
distinguished connections.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .algebroid import LieAlgebroid, lift_function
from .config import DEFAULT, Tolerances
from .connections import DConnection, covariant_derivative_form
from .horizontal import HorizontalEndo, from_semispray, weak_torsion_block
from .numeric import Residual, residual, values
from .prolongation import (
    anchor_prolong,
    d_function,
    d_oneform,
    euler,
    form_on,
    frame_section,
    interior,
    interior_tensor,
    lie_derivative_2form,
    liouville,
    vertical_endomorphism,
)
from .symcalc import Evaluator, Expr, Y, asarray, build, differentiate, esum, inverse, zeros

KINDS = ("berwald", "cartan", "chern_rund", "hashiguchi")


class FinslerStructure:
    """A Finsler function ``F`` on the algebroid ``A``; derived fields are built lazily."""

    def __init__(self, A: LieAlgebroid, F: Expr):
        self.A = A
        self.F = F
        self.n = A.n

    @cached_property
    def dF(self) -> np.ndarray:
        """∂F/∂y^a."""
        return build((self.n,), lambda a: differentiate(self.F, Y(a)))

    @cached_property
    def G(self) -> np.ndarray:
        """G_ab = ∂²F/∂y^a∂y^b."""
        return build((self.n, self.n), lambda a, b: differentiate(self.dF[a], Y(b)))

    @cached_property
    def Ginv(self) -> np.ndarray:
        """G^{ab}: pointwise inverse (derivatives via the inverse rule)."""
        return inverse(self.G)

    @cached_property
    def dG(self) -> np.ndarray:
        """∂G_ab/∂y^c = ∂³F, indexed [a, b, c]."""
        n = self.n
        return build((n, n, n), lambda a, b, c: differentiate(self.G[a, b], Y(c)))

    @cached_property
    def omega_xx(self) -> np.ndarray:
        """ω(X_a, X_b) = ρ_a∂_x(∂F/∂y^b) − ρ_b∂_x(∂F/∂y^a) − (∂F/∂y^g) L^g_{ab}."""
        A, n = self.A, self.n
        return build(
            (n, n),
            lambda a, b: A.anchor(a, self.dF[b])
            - A.anchor(b, self.dF[a])
            - esum(self.dF[g] * A.L[g, a, b] for g in range(n)),
        )


# ---------------------------------------------------------------------------
# fundamental form, metrics
# ---------------------------------------------------------------------------


def d_J(FS: FinslerStructure, f: Expr | None = None) -> np.ndarray:
    """d_J f = (∂f/∂y^a) X^a as a 1-form on the prolongation (f defaults to F)."""
    n = FS.n
    f = FS.F if f is None else f
    th = zeros(2 * n)
    for a in range(n):
        th[a] = differentiate(f, Y(a))
    return th


def fundamental_form(FS: FinslerStructure) -> np.ndarray:
    """ω in closed form: XX block ``omega_xx``, ω(X_a, V_b) = −G_ab, ω(V_a, X_b) = G_ab."""
    n = FS.n
    w = zeros(2 * n, 2 * n)
    w[:n, :n] = FS.omega_xx
    w[:n, n:] = -FS.G
    w[n:, :n] = FS.G.T
    return w


def fundamental_form_definitional(FS: FinslerStructure) -> np.ndarray:
    """ω = d(d_J F) through the exterior derivative of the prolongation."""
    return d_oneform(FS.A, d_J(FS))


def prolonged_metric(FS: FinslerStructure, h: HorizontalEndo) -> np.ndarray:
    """G̃ = G X^a⊗X^b + G δV^a⊗δV^b in the frame {X_α, V_α}, with δV^a = V^a − B^a_b X^b."""
    n, G, B = FS.n, FS.G, h.B
    GB = build((n, n), lambda m, b: esum(G[m, k] * B[k, b] for k in range(n)))  # G_mk B^k_b
    M = zeros(2 * n, 2 * n)
    for a in range(n):
        for b in range(n):
            M[a, b] = G[a, b] + esum(B[m, a] * GB[m, b] for m in range(n))
            M[a, n + b] = -GB[b, a]
            M[n + a, b] = -GB[a, b]
            M[n + a, n + b] = G[a, b]
    return M


def prolonged_metric_adapted(FS: FinslerStructure) -> np.ndarray:
    """G̃ in the adapted frame {δ_α, V_α}: block-diagonal diag(G, G)."""
    n = FS.n
    M = zeros(2 * n, 2 * n)
    M[:n, :n] = FS.G
    M[n:, n:] = FS.G
    return M


def kahler_form(FS: FinslerStructure, h: HorizontalEndo) -> np.ndarray:
    """K_h(X, Y) = G̃(X, JY) − G̃(JX, Y)."""
    n = FS.n
    G = prolonged_metric(FS, h)
    J = vertical_endomorphism(n)
    N = 2 * n
    return build(
        (N, N),
        lambda a, b: esum(G[a, c] * J[c, b] for c in range(N)) - esum(J[c, a] * G[c, b] for c in range(N)),
    )


# ---------------------------------------------------------------------------
# musical isomorphism, gradient
# ---------------------------------------------------------------------------


def sharp(FS: FinslerStructure, theta) -> np.ndarray:
    """The section U with i_U ω = θ, for a 1-form θ on the prolongation."""
    n, Gi, Axx = FS.n, FS.Ginv, FS.omega_xx
    theta = asarray(theta)
    ux = build((n,), lambda a: -esum(Gi[a, b] * theta[n + b] for b in range(n)))
    rhs = build((n,), lambda b: theta[b] - esum(ux[l] * Axx[l, b] for l in range(n)))
    uv = build((n,), lambda a: esum(Gi[a, b] * rhs[b] for b in range(n)))
    return np.concatenate([ux, uv])


def gradient(FS: FinslerStructure, phi: Expr) -> np.ndarray:
    """grad φ = −G^{ab}∂φ/∂y^b X_a + G^{ab}(ρ_b∂φ + A_{lb} G^{lg} ∂φ/∂y^g) V_a,
    with A_{lb} = ω(X_l, X_b)."""
    A, n, Gi, Axx = FS.A, FS.n, FS.Ginv, FS.omega_xx
    dy = [differentiate(phi, Y(b)) for b in range(n)]
    gx = build((n,), lambda a: -esum(Gi[a, b] * dy[b] for b in range(n)))
    inner = build(
        (n,),
        lambda b: A.anchor(b, phi)
        + esum(Axx[l, b] * Gi[l, g] * dy[g] for l in range(n) for g in range(n)),
    )
    gv = build((n,), lambda a: esum(Gi[a, b] * inner[b] for b in range(n)))
    return np.concatenate([gx, gv])


def solve_sharp_numeric(FS: FinslerStructure, theta, ev: Evaluator) -> np.ndarray:
    """Pointwise linear solve of i_U ω = θ (independent numerical route), shape (P, 2n)."""
    w = values(fundamental_form_definitional(FS), ev)
    th = values(asarray(theta), ev)
    # (i_U ω)_b = U^a ω_ab  ⇒  ω^T U = θ
    return np.linalg.solve(np.transpose(w, (0, 2, 1)), th[..., None])[..., 0]


# ---------------------------------------------------------------------------
# canonical spray, Barthel endomorphism, conservativity
# ---------------------------------------------------------------------------


def canonical_spray(FS: FinslerStructure) -> np.ndarray:
    """S₀ = y^a X_a + S₀^a V_a with
    S₀^a = G^{ab}(ρ_b∂F + y^g((∂F/∂y^l) L^l_{gb} − ρ_g∂(∂F/∂y^b)))."""
    A, n, Gi, dF = FS.A, FS.n, FS.Ginv, FS.dF
    inner = build(
        (n,),
        lambda b: A.anchor(b, FS.F)
        + esum(
            Y(g) * (esum(dF[l] * A.L[l, g, b] for l in range(n)) - A.anchor(g, dF[b]))
            for g in range(n)
        ),
    )
    S = zeros(2 * n)
    for a in range(n):
        S[a] = Y(a)
        S[n + a] = esum(Gi[a, b] * inner[b] for b in range(n))
    return S


def barthel(FS: FinslerStructure) -> HorizontalEndo:
    """Horizontal endomorphism generated by the canonical spray."""
    return from_semispray(FS.A, canonical_spray(FS))


def conservativity_defect(FS: FinslerStructure, h: HorizontalEndo) -> np.ndarray:
    """ρ_a∂F/∂x + B^b_a ∂F/∂y^b for each a (zero iff h is conservative)."""
    return build((FS.n,), lambda a: h.anchor_delta(a, FS.F))


def d_K(FS: FinslerStructure, K, f: Expr | None = None) -> np.ndarray:
    """d_K f for a (1,1)-tensor K: (d_K f)(e_b) = ρ_£(K e_b) f."""
    f = FS.F if f is None else f
    K = asarray(K)
    N = K.shape[0]
    return build((N,), lambda b: anchor_prolong(FS.A, K[:, b], f))


# ---------------------------------------------------------------------------
# Cartan tensors
# ---------------------------------------------------------------------------


def first_cartan(FS: FinslerStructure) -> tuple[np.ndarray, np.ndarray]:
    """(C^g_{ab} = ½ ∂³F/∂y^a∂y^b∂y^l G^{gl}, lowered C_{abg} = ½ ∂³F/∂y^a∂y^b∂y^g)."""
    n, Gi, dG = FS.n, FS.Ginv, FS.dG
    low = build((n, n, n), lambda a, b, g: 0.5 * dG[a, b, g])
    up = build((n, n, n), lambda g, a, b: esum(low[a, b, l] * Gi[g, l] for l in range(n)))
    return up, low


def second_cartan(FS: FinslerStructure, h: HorizontalEndo) -> tuple[np.ndarray, np.ndarray]:
    """Second Cartan tensor C̃^g_{ab} (stored [g, a, b]) and its lowered form C̃_{abg}."""
    n, G, Gi, B = FS.n, FS.G, FS.Ginv, h.B
    dB = lambda l, a, m: differentiate(B[l, a], Y(m))
    hG = build((n, n, n), lambda a, b, m: h.anchor_delta(a, G[b, m]))  # ρ(δ_a) G_bm

    def up(g, a, b):
        return 0.5 * (
            esum(hG[a, b, m] * Gi[g, m] for m in range(n))
            + dB(g, a, b)
            + esum(dB(l, a, m) * Gi[g, m] * G[b, l] for l in range(n) for m in range(n))
        )

    def low(a, b, g):
        return 0.5 * (
            hG[a, b, g]
            + esum(dB(l, a, b) * G[l, g] for l in range(n))
            + esum(dB(l, a, g) * G[b, l] for l in range(n))
        )

    return build((n, n, n), up), build((n, n, n), low)


# ---------------------------------------------------------------------------
# distinguished connections
# ---------------------------------------------------------------------------


def cartan_horizontal_coefficients(FS: FinslerStructure, h: HorizontalEndo) -> np.ndarray:
    """F^m_{ab} = ½G^{mg}(ρ(δ_a)G_bg − ∂_bB^l_a G_lg + ∂_gB^l_a G_lb)."""
    n, G, Gi, B = FS.n, FS.G, FS.Ginv, h.B
    dB = lambda l, a, m: differentiate(B[l, a], Y(m))

    def low(a, b, g):
        return h.anchor_delta(a, G[b, g]) + esum(
            -dB(l, a, b) * G[l, g] + dB(l, a, g) * G[l, b] for l in range(n)
        )

    L3 = build((n, n, n), low)
    return build((n, n, n), lambda m, a, b: 0.5 * esum(Gi[m, g] * L3[a, b, g] for g in range(n)))


def berwald_coefficients(h: HorizontalEndo) -> np.ndarray:
    n = h.n
    return build((n, n, n), lambda g, a, b: -differentiate(h.B[g, a], Y(b)))


def distinguished_connection(FS: FinslerStructure, kind: str, h: HorizontalEndo | None = None) -> DConnection:
    """Berwald, Cartan, Chern–Rund or Hashiguchi connection (relative to Barthel by default)."""
    if kind not in KINDS:
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {KINDS}")
    h = barthel(FS) if h is None else h
    n = FS.n
    Fh = cartan_horizontal_coefficients(FS, h) if kind in ("cartan", "chern_rund") else berwald_coefficients(h)
    Cv = first_cartan(FS)[0] if kind in ("cartan", "hashiguchi") else zeros(n, n, n)
    return DConnection(h, Fh, Cv, kind)


def metricity(D: DConnection, FS: FinslerStructure) -> tuple[np.ndarray, np.ndarray]:
    """(D_{δ_a} G̃, D_{V_a} G̃) in the frame {X_α, V_α}, stacked over a: shapes (n, 2n, 2n)."""
    from .horizontal import adapted_section

    n = FS.n
    G = prolonged_metric(FS, D.h)
    hpart = np.stack([covariant_derivative_form(D, adapted_section(D.h, a), G) for a in range(n)])
    vpart = np.stack([covariant_derivative_form(D, frame_section(n, n + a), G) for a in range(n)])
    return hpart, vpart


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinslerReport:
    homogeneity: Residual
    positivity_margin: float
    min_abs_det: float
    regular: bool
    i_J_omega: Residual
    lie_C_omega: Residual
    i_C_omega: Residual
    passed: bool


def verify_finsler(FS: FinslerStructure, x, y, tol: Tolerances = DEFAULT.tol) -> FinslerReport:
    """Homogeneity, positivity, regularity and the three fundamental-form identities."""
    A, n = FS.A, FS.n
    ev = Evaluator(x, y)
    hom = residual(euler(n, FS.F), 2 * FS.F, ev)
    Fv = ev(FS.F)
    pos = float(np.min(Fv))
    Gv = values(FS.G, ev)
    dets = np.abs(np.linalg.det(Gv))
    scale = np.mean(np.abs(Gv), axis=(1, 2))
    regular = bool(np.all(dets >= tol.det_rel * scale**n))
    w = fundamental_form_definitional(FS)
    J = vertical_endomorphism(n)
    C = liouville(n)
    r_iJ = residual(interior_tensor(J, w), 0, ev) if regular else Residual(np.full(ev.size, np.inf), 0.0)
    r_lie = residual(lie_derivative_2form(A, C, w), w, ev)
    r_iC = residual(interior(C, w), d_J(FS), ev)
    passed = (
        hom.passes(tol) and pos > 0 and regular and r_iJ.passes(tol) and r_lie.passes(tol) and r_iC.passes(tol)
    )
    return FinslerReport(hom, pos, float(np.min(dets)), regular, r_iJ, r_lie, r_iC, passed)


def spray_difference(FS: FinslerStructure, h: HorizontalEndo):
    """Both sides of i_{S−S₀} ω = d_{i_S t} F, S the associated semispray of h."""
    from .horizontal import associated_semispray

    n = FS.n
    S = associated_semispray(h)
    diff = S - canonical_spray(FS)
    lhs = interior(diff, fundamental_form(FS))
    t = weak_torsion_block(h)
    # (d_{i_S t} F)(X_b) = y^a t^g_{ab} ∂F/∂y^g, zero on V_b
    rhs = zeros(2 * n)
    for b in range(n):
        rhs[b] = esum(Y(a) * t[g, a, b] * FS.dF[g] for a in range(n) for g in range(n))
    return lhs, rhs


def decomposition_prediction(FS: FinslerStructure, h: HorizontalEndo) -> np.ndarray:
    """h₀ + ½ i_S t + ½ [J, (d_{i_S t} F)^♯] as a 2n×2n matrix."""
    from .horizontal import associated_semispray, matrix, weak_torsion
    from .prolongation import contract_first, fn_bracket_section

    n = FS.n
    S = associated_semispray(h)
    _, rhs = spray_difference(FS, h)
    U = sharp(FS, rhs)
    h0 = matrix(barthel(FS))
    iSt = contract_first(S, weak_torsion(h))
    return h0 + 0.5 * iSt + 0.5 * fn_bracket_section(FS.A, vertical_endomorphism(n), U)


def complete_lift_check(FS: FinslerStructure, f: Expr) -> tuple[Expr, Expr]:
    """(ρ_£(grad f^∨) F, f^c) for a base function f."""
    g = gradient(FS, f)
    return anchor_prolong(FS.A, g, FS.F), lift_function(FS.A, f, "complete")


def metric_on_vertical_lifts(FS: FinslerStructure, h: HorizontalEndo, a: int, b: int) -> tuple[Expr, Expr]:
    """(G̃(e_a^V, e_b^V), ρ_£(e_a^V)(ρ_£(e_b^V) F))."""
    n = FS.n
    Va, Vb = frame_section(n, n + a), frame_section(n, n + b)
    G = prolonged_metric(FS, h)
    return form_on(G, Va, Vb), anchor_prolong(FS.A, Va, anchor_prolong(FS.A, Vb, FS.F))


def exterior_check(FS: FinslerStructure, phi: Expr) -> tuple[np.ndarray, np.ndarray]:
    """(i_{grad φ} ω, d^£ φ)."""
    return interior(gradient(FS, phi), fundamental_form(FS)), d_function(FS.A, phi)
