"""Distinguished connections on the prolongation and derivatives on the pullback bundle.

A d-connection relative to a horizontal endomorphism ``h`` is given by two
coefficient fields in the adapted frame {δ_α, V_α}::

    D_{δ_a} δ_b = F^g_{ab} δ_g,   D_{δ_a} V_b = F^g_{ab} V_g,
    D_{V_a} δ_b = C^g_{ab} δ_g,   D_{V_a} V_b = C^g_{ab} V_g,

stored as ``F[g, a, b]`` and ``C[g, a, b]``.  Curvature coefficients are
stored as ``R[l, a, b, g] = R^l_{abg}`` (likewise ``P`` and ``S``), where
``R(X_a, X_b)X_g = K(δ_a, δ_b)V_g``, ``P = K(δ_a, V_b)V_g`` and
``S = K(V_a, V_b)V_g``.

Sections of the pullback bundle π*π are length-``n`` arrays in the frame
``ê_α``; a derivative on it is stored by its adapted-frame coefficients
``D_{δ_a} ê_b = Fh[g, a, b] ê_g`` and ``D_{V_a} ê_b = Fv[g, a, b] ê_g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .horizontal import (
    HorizontalEndo,
    adapted_frame,
    adapted_section,
    curvature_coefficients,
)
from .prolongation import (
    anchor_prolong,
    apply,
    bracket_prolong,
    frame_section,
)
from .symcalc import ZERO, Expr, Y, asarray, build, differentiate, esum, zeros


@dataclass(frozen=True, eq=False)
class DConnection:
    h: HorizontalEndo
    F: np.ndarray
    C: np.ndarray
    name: str = "d-connection"

    def __post_init__(self):
        n = self.h.n
        object.__setattr__(self, "F", asarray(self.F).reshape(n, n, n))
        object.__setattr__(self, "C", asarray(self.C).reshape(n, n, n))

    @property
    def n(self) -> int:
        return self.h.n

    @property
    def A(self):
        return self.h.A


# ---------------------------------------------------------------------------
# covariant derivative
# ---------------------------------------------------------------------------


def _anchor_adapted(h: HorizontalEndo, a: int, f: Expr) -> Expr:
    n = h.n
    return h.anchor_delta(a, f) if a < n else differentiate(f, Y(a - n))


def to_adapted(h: HorizontalEndo, S) -> np.ndarray:
    """Components of a section in the adapted frame {δ_α, V_α}."""
    _, Q = adapted_frame(h)
    return apply(Q, S)


def from_adapted(h: HorizontalEndo, s) -> np.ndarray:
    P, _ = adapted_frame(h)
    return apply(P, s)


def covariant_derivative(D: DConnection, U, W) -> np.ndarray:
    """D_U W for sections given in the frame {X_α, V_α}; result in the same frame."""
    h, n = D.h, D.n
    u, w = to_adapted(h, U), to_adapted(h, W)
    out = []
    for k in range(2 * n):
        g, vert = k % n, k >= n
        terms = []
        for a in range(2 * n):
            if u[a] is ZERO:
                continue
            terms.append(u[a] * _anchor_adapted(h, a, w[k]))
            coeff = D.F if a < n else D.C
            aa = a % n
            # w-components of the same type (δ→δ, V→V) feed the k-th component
            for b in range(n):
                wb = w[n + b] if vert else w[b]
                if wb is ZERO:
                    continue
                terms.append(u[a] * wb * coeff[g, aa, b])
        out.append(esum(terms))
    return from_adapted(h, asarray(out))


def covariant_derivative_11(D: DConnection, U, K) -> np.ndarray:
    """(D_U K)(e_b) = D_U(K e_b) − K(D_U e_b) for a (1,1)-tensor K."""
    n = D.n
    K = asarray(K)
    out = zeros(2 * n, 2 * n)
    for b in range(2 * n):
        eb = frame_section(n, b)
        out[:, b] = covariant_derivative(D, U, K[:, b]) - apply(K, covariant_derivative(D, U, eb))
    return out


def covariant_derivative_form(D: DConnection, U, g) -> np.ndarray:
    """(D_U g)(e_a, e_b) = ρ_£(U) g_ab − g(D_U e_a, e_b) − g(e_a, D_U e_b) for a bilinear form g."""
    n = D.n
    N = 2 * n
    g = asarray(g)
    De = [covariant_derivative(D, U, frame_section(n, a)) for a in range(N)]
    return build(
        (N, N),
        lambda a, b: anchor_prolong(D.A, U, g[a, b])
        - esum(De[a][c] * g[c, b] for c in range(N) if De[a][c] is not ZERO)
        - esum(g[a, c] * De[b][c] for c in range(N) if De[b][c] is not ZERO),
    )


# ---------------------------------------------------------------------------
# torsion
# ---------------------------------------------------------------------------


def torsion_components(D: DConnection) -> dict[str, np.ndarray]:
    """Closed-form torsion blocks on frame pairs (X_a, X_b), indexed [g, a, b].

    ``A``: h-horizontal (δ_g-valued), ``B``: h-mixed (δ_g-valued), ``R1``:
    v-horizontal, ``P1``: v-mixed, ``S1``: v-vertical (V_g-valued).  ``B``
    is evaluated as hT(δ_a, V_b) = −D_{V_b}δ_a, i.e. ``B[g, a, b] = −C^g_{ba}``.
    """
    h, n, F, C, L = D.h, D.n, D.F, D.C, D.A.L
    R = curvature_coefficients(h)
    return {
        "A": build((n, n, n), lambda g, a, b: F[g, a, b] - F[g, b, a] - L[g, a, b]),
        "B": build((n, n, n), lambda g, a, b: -C[g, b, a]),
        "R1": build((n, n, n), lambda g, a, b: -R[g, a, b]),
        "P1": build((n, n, n), lambda g, a, b: F[g, a, b] + differentiate(h.B[g, a], Y(b))),
        "S1": build((n, n, n), lambda g, a, b: C[g, a, b] - C[g, b, a]),
    }


def torsion_tensor(D: DConnection) -> np.ndarray:
    """T(e_a, e_b) = D_{e_a}e_b − D_{e_b}e_a − [e_a, e_b] on the frame {X_α, V_α}."""
    n = D.n
    N = 2 * n
    T = zeros(N, N, N)
    for a in range(N):
        ea = frame_section(n, a)
        for b in range(a + 1, N):
            eb = frame_section(n, b)
            val = (
                covariant_derivative(D, ea, eb)
                - covariant_derivative(D, eb, ea)
                - bracket_prolong(D.A, ea, eb)
            )
            T[:, a, b] = val
            T[:, b, a] = -val
    return T


def torsion_components_definitional(D: DConnection) -> dict[str, np.ndarray]:
    """Torsion blocks from covariant derivatives and brackets of the adapted frame."""
    h, n, A = D.h, D.n, D.A
    P, Q = adapted_frame(h)
    cd = lambda U, W: covariant_derivative(D, U, W)
    br = lambda U, W: bracket_prolong(A, U, W)
    d = [adapted_section(h, a) for a in range(n)]
    V = [adapted_section(h, n + a) for a in range(n)]
    out = {k: zeros(n, n, n) for k in ("A", "B", "R1", "P1", "S1")}
    for a in range(n):
        for b in range(n):
            tA = apply(Q, cd(d[a], d[b]) - cd(d[b], d[a]) - br(d[a], d[b]))
            tB = apply(Q, -cd(V[b], d[a]) - br(d[a], V[b]))
            tR = apply(Q, -br(d[a], d[b]))
            tP = apply(Q, cd(d[a], V[b]) - br(d[a], V[b]))
            tS = apply(Q, cd(V[a], V[b]) - cd(V[b], V[a]) - br(V[a], V[b]))
            out["A"][:, a, b] = tA[:n]
            out["B"][:, a, b] = tB[:n]
            out["R1"][:, a, b] = tR[n:]
            out["P1"][:, a, b] = tP[n:]
            out["S1"][:, a, b] = tS[n:]
    return out


def h_deflection(D: DConnection) -> np.ndarray:
    """Block of D_{δ_a} C = (B^g_a + y^b F^g_{ab}) V_g, indexed [g, a]."""
    n, F = D.n, D.F
    return build((n, n), lambda g, a: D.h.B[g, a] + esum(Y(b) * F[g, a, b] for b in range(n)))


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


def curvature_blocks(h: HorizontalEndo, F, C) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Horizontal, mixed and vertical curvature coefficients of the coefficient pair (F, C).

    R^l_{abg} = ρ(δ_a)F^l_{bg} − ρ(δ_b)F^l_{ag} + F^m_{bg}F^l_{am} − F^m_{ag}F^l_{bm}
                − L^m_{ab}F^l_{mg} − R^m_{ab}C^l_{mg}
    P^l_{abg} = ρ(δ_a)C^l_{bg} + C^m_{bg}F^l_{am} − ∂_b F^l_{ag} − F^m_{ag}C^l_{bm} + ∂_b B^m_a C^l_{mg}
    S^l_{abg} = ∂_a C^l_{bg} + C^m_{bg}C^l_{am} − ∂_b C^l_{ag} − C^m_{ag}C^l_{bm}
    """
    n = h.n
    L = h.A.L
    Rh = curvature_coefficients(h)
    F, C = asarray(F), asarray(C)
    dy = lambda e, b: differentiate(e, Y(b))
    rng = range(n)

    def Rc(l, a, b, g):
        return (
            h.anchor_delta(a, F[l, b, g])
            - h.anchor_delta(b, F[l, a, g])
            + esum(F[m, b, g] * F[l, a, m] - F[m, a, g] * F[l, b, m] for m in rng)
            - esum(L[m, a, b] * F[l, m, g] for m in rng)
            - esum(Rh[m, a, b] * C[l, m, g] for m in rng)
        )

    def Pc(l, a, b, g):
        return (
            h.anchor_delta(a, C[l, b, g])
            + esum(C[m, b, g] * F[l, a, m] - F[m, a, g] * C[l, b, m] for m in rng)
            - dy(F[l, a, g], b)
            + esum(dy(h.B[m, a], b) * C[l, m, g] for m in rng)
        )

    def Sc(l, a, b, g):
        return (
            dy(C[l, b, g], a)
            - dy(C[l, a, g], b)
            + esum(C[m, b, g] * C[l, a, m] - C[m, a, g] * C[l, b, m] for m in rng)
        )

    shape = (n, n, n, n)
    return build(shape, Rc), build(shape, Pc), build(shape, Sc)


def curvature_components(D: DConnection) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    return curvature_blocks(D.h, D.F, D.C)


def curvature_operator(D: DConnection, U, W, Z) -> np.ndarray:
    """K(U, W)Z = D_U D_W Z − D_W D_U Z − D_{[U,W]} Z (definitional oracle)."""
    cd = lambda P_, Q_: covariant_derivative(D, P_, Q_)
    return cd(U, cd(W, Z)) - cd(W, cd(U, Z)) - cd(bracket_prolong(D.A, U, W), Z)


def curvature_definitional(D: DConnection, which: str, a: int, b: int, g: int) -> np.ndarray:
    """V-components of K(first, second)V_g with (first, second) = (δ_a, δ_b) for
    ``which='R'``, (δ_a, V_b) for ``'P'`` and (V_a, V_b) for ``'S'``."""
    h, n = D.h, D.n
    first = adapted_section(h, a if which in "RP" else n + a)
    second = adapted_section(h, b if which == "R" else n + b)
    val = curvature_operator(D, first, second, adapted_section(h, n + g))
    return to_adapted(h, val)[n:]


def mixed_ricci(D: DConnection, P=None) -> np.ndarray:
    """P_{ag} = P^b_{abg}."""
    n = D.n
    if P is None:
        P = curvature_components(D)[1]
    return build((n, n), lambda a, g: esum(P[b, a, b, g] for b in range(n)))


def contract_semispray_first(D: DConnection, T4) -> np.ndarray:
    """y^a T^l_{abg} (insertion of the semispray direction into the first slot)."""
    n = D.n
    return build((n, n, n), lambda l, b, g: esum(Y(a) * T4[l, a, b, g] for a in range(n)))


# ---------------------------------------------------------------------------
# constructions
# ---------------------------------------------------------------------------


def berwald_type(h: HorizontalEndo) -> DConnection:
    """F^g_{ab} = −∂B^g_a/∂y^b, C = 0."""
    n = h.n
    return DConnection(
        h, build((n, n, n), lambda g, a, b: -differentiate(h.B[g, a], Y(b))), zeros(n, n, n), "berwald-type"
    )


def _trace_d2B(h: HorizontalEndo) -> np.ndarray:
    """∂²B^l_a/∂y^l∂y^b, indexed [a, b]."""
    n = h.n
    return build(
        (n, n),
        lambda a, b: esum(differentiate(differentiate(h.B[l, a], Y(l)), Y(b)) for l in range(n)),
    )


def yano_type(h: HorizontalEndo) -> DConnection:
    """F^g_{ab} = (1/(n+1)) ∂²B^l_a/∂y^l∂y^b · y^g − ∂B^g_a/∂y^b, C = 0."""
    n = h.n
    tr = _trace_d2B(h)
    k = 1.0 / (n + 1)
    return DConnection(
        h,
        build((n, n, n), lambda g, a, b: k * tr[a, b] * Y(g) - differentiate(h.B[g, a], Y(b))),
        zeros(n, n, n),
        "yano-type",
    )


def yano_mixed_curvature(h: HorizontalEndo) -> np.ndarray:
    """Closed form of the Yano-type mixed curvature:
    ∂²B^l_a/∂y^b∂y^g − (1/(n+1))(∂²B^m_a/∂y^m∂y^g δ^l_b + ∂³B^m_a/∂y^b∂y^m∂y^g y^l)."""
    n = h.n
    k = 1.0 / (n + 1)
    tr = _trace_d2B(h)
    d2 = lambda e, b, g: differentiate(differentiate(e, Y(b)), Y(g))
    return build(
        (n, n, n, n),
        lambda l, a, b, g: d2(h.B[l, a], b, g)
        - k * ((tr[a, g] if l == b else 0.0) + differentiate(tr[a, g], Y(b)) * Y(l)),
    )


def douglas_tensor(h: HorizontalEndo) -> np.ndarray:
    """Douglas tensor D^l_{abg} of a Berwald endomorphism, indexed [l, a, b, g]."""
    n = h.n
    k = 1.0 / (n + 1)
    tr = _trace_d2B(h)  # tr[a, g] = ∂²B^m_a/∂y^m∂y^g
    d2 = lambda e, b, g: differentiate(differentiate(e, Y(b)), Y(g))

    def comp(l, a, b, g):
        e = d2(h.B[l, a], b, g)
        corr = differentiate(tr[b, g], Y(a)) * Y(l)
        if l == b:
            corr = corr + tr[a, g]
        if l == g:
            corr = corr + tr[a, b]
        if l == a:
            corr = corr + tr[b, g]
        return e - k * corr

    return build((n, n, n, n), comp)


def douglas_contractions(h: HorizontalEndo, Dg=None) -> tuple[np.ndarray, np.ndarray]:
    """(i_S D)^l_{bg} = y^a D^l_{abg} and D_ric = D^b_{abg}."""
    n = h.n
    Dg = douglas_tensor(h) if Dg is None else Dg
    iS = build((n, n, n), lambda l, b, g: esum(Y(a) * Dg[l, a, b, g] for a in range(n)))
    ric = build((n, n), lambda a, g: esum(Dg[b, a, b, g] for b in range(n)))
    return iS, ric


def associated_dconnection(D: DConnection) -> DConnection:
    """F̃ = F, C̃ = 0."""
    n = D.n
    return DConnection(D.h, D.F, zeros(n, n, n), f"associated({D.name})")


def associated_mixed_curvature(D: DConnection) -> np.ndarray:
    """Closed form P̃^l_{abg} = −∂F^l_{ag}/∂y^b of the associated d-connection."""
    n = D.n
    return build((n, n, n, n), lambda l, a, b, g: -differentiate(D.F[l, a, g], Y(b)))


# ---------------------------------------------------------------------------
# derivatives on the pullback bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PullbackDerivative:
    """A ρ_£-covariant derivative on sections of π*π, by adapted-frame coefficients."""

    h: HorizontalEndo
    Fh: np.ndarray
    Fv: np.ndarray
    name: str = "pullback-derivative"

    @property
    def n(self) -> int:
        return self.h.n

    def derivative(self, U, Ybar) -> np.ndarray:
        """D_U Ȳ for U in the frame {X_α, V_α} and Ȳ in the frame ê_α."""
        h, n = self.h, self.n
        u = to_adapted(h, U)
        Ybar = asarray(Ybar)
        out = []
        for b in range(n):
            terms = []
            for a in range(2 * n):
                if u[a] is ZERO:
                    continue
                terms.append(u[a] * _anchor_adapted(h, a, Ybar[b]))
                coeff = self.Fh if a < n else self.Fv
                terms.extend(u[a] * Ybar[g] * coeff[b, a % n, g] for g in range(n) if Ybar[g] is not ZERO)
            out.append(esum(terms))
        return asarray(out)

    # maps between π*π and the prolongation (adapted frame realisation)
    def H(self, Xbar) -> np.ndarray:
        """H̄ ê_a = δ_a."""
        n = self.n
        s = zeros(2 * n)
        s[:n] = asarray(Xbar)
        return from_adapted(self.h, s)

    def i(self, Xbar) -> np.ndarray:
        """ī ê_a = V_a."""
        n = self.n
        s = zeros(2 * n)
        s[n:] = asarray(Xbar)
        return s

    def j(self, U) -> np.ndarray:
        """j̄ δ_a = ê_a, j̄ V_a = 0."""
        return to_adapted(self.h, U)[: self.n]

    def Vbar(self, U) -> np.ndarray:
        """V̄ V_a = ê_a, V̄ δ_a = 0."""
        return to_adapted(self.h, U)[self.n :]


def berwald_derivative(h: HorizontalEndo) -> PullbackDerivative:
    n = h.n
    return PullbackDerivative(
        h, build((n, n, n), lambda g, a, b: -differentiate(h.B[g, a], Y(b))), zeros(n, n, n), "berwald"
    )


def yano_derivative(h: HorizontalEndo) -> PullbackDerivative:
    """∇ + (1/(n+1)) tr P̊(j̄·, ·) δ, with P̊ the Berwald mixed curvature."""
    n = h.n
    base = berwald_derivative(h)
    # trace of the Berwald mixed curvature ∂²B^l_a/∂y^b∂y^g over (l, b)
    tr = _trace_d2B(h)
    k = 1.0 / (n + 1)
    Fh = build((n, n, n), lambda g, a, b: base.Fh[g, a, b] + k * tr[a, b] * Y(g))
    return PullbackDerivative(h, Fh, zeros(n, n, n), "yano")


def pullback_torsions(Dp: PullbackDerivative) -> dict[str, np.ndarray]:
    """Partial torsions on frame pairs (ê_a, ê_b) through the defining formulas
    with H̄, ī, j̄, V̄ and prolongation brackets, indexed [g, a, b]."""
    n = Dp.n
    A = Dp.h.A
    e = [asarray([1.0 if k == a else 0.0 for k in range(n)]) for a in range(n)]
    br = lambda U, W: bracket_prolong(A, U, W)
    D = Dp.derivative
    out = {k: zeros(n, n, n) for k in ("A", "B", "R1", "P1", "Q1")}
    for a in range(n):
        Ha, ia = Dp.H(e[a]), Dp.i(e[a])
        for b in range(n):
            Hb, ib = Dp.H(e[b]), Dp.i(e[b])
            out["A"][:, a, b] = D(Ha, e[b]) - D(Hb, e[a]) - Dp.j(br(Ha, Hb))
            out["B"][:, a, b] = -D(ib, e[a]) - Dp.j(br(Ha, ib))
            out["R1"][:, a, b] = -Dp.Vbar(br(Ha, Hb))
            out["P1"][:, a, b] = D(Ha, e[b]) - Dp.Vbar(br(Ha, ib))
            out["Q1"][:, a, b] = D(ia, e[b]) - D(ib, e[a]) - Dp.Vbar(br(ia, ib))
    return out


def pullback_curvature_definitional(Dp: PullbackDerivative, which: str, a: int, b: int, g: int) -> np.ndarray:
    """K(U, W)ê_g = D_U D_W ê_g − D_W D_U ê_g − D_{[U,W]} ê_g with (U, W) =
    (δ_a, δ_b), (δ_a, V_b) or (V_a, V_b) for ``which`` = R, P, S."""
    h, n = Dp.h, Dp.n
    U = adapted_section(h, a if which in "RP" else n + a)
    W = adapted_section(h, b if which == "R" else n + b)
    eg = asarray([1.0 if k == g else 0.0 for k in range(n)])
    D = Dp.derivative
    return D(U, D(W, eg)) - D(W, D(U, eg)) - D(bracket_prolong(h.A, U, W), eg)


def hessian(n: int, f: Expr) -> np.ndarray:
    """∇^v∇^v f̃ in frame components: ∂²f̃/∂y^a∂y^b."""
    return build((n, n), lambda a, b: differentiate(differentiate(f, Y(a)), Y(b)))


def hessian_by_lifts(A, f: Expr) -> np.ndarray:
    """ρ_£(e_a^V)(ρ_£(e_b^V) f̃) computed through the prolongation anchor."""
    n = A.n
    V = [frame_section(n, n + a) for a in range(n)]
    return build((n, n), lambda a, b: anchor_prolong(A, V[a], anchor_prolong(A, V[b], f)))


def v_derivative_along_delta(n: int, T) -> np.ndarray:
    """∇^v_δ of a semibasic covariant tensor: y^m ∂T/∂y^m entrywise (∇_{V_a} ê_b = 0)."""
    T = asarray(T)
    out = np.empty(T.shape, dtype=object)
    for idx in np.ndindex(T.shape):
        out[idx] = esum(Y(m) * differentiate(T[idx], Y(m)) for m in range(n))
    return out


def dconnection_J_defect(D: DConnection, U) -> np.ndarray:
    """(D_U J) — vanishes for every d-connection."""
    from .prolongation import vertical_endomorphism

    return covariant_derivative_11(D, U, vertical_endomorphism(D.n))


def almost_complex_torsion_prediction(D: DConnection) -> np.ndarray:
    """F∘t + Ω as a (1,2)-tensor on the frame {X_α, V_α}."""
    from .horizontal import almost_complex, curvature, weak_torsion
    from .prolongation import compose_12

    return compose_12(almost_complex(D.h), weak_torsion(D.h)) + curvature(D.h)

