"""Horizontal endomorphisms of the prolongation and their derived geometry.

A horizontal endomorphism is stored by its n×n block ``B[a, b] = B^a_b``:
``h(X_b) = X_b + B^a_b V_a`` and ``h(V_b) = 0``.  Its matrix in the frame
{X_α, V_α} is ``[[I, 0], [B, 0]]``.  The adapted frame is
``δ_α = X_α + B^β_α V_β`` together with ``V_α``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebroid import LieAlgebroid
from .prolongation import contract_first, euler, liouville
from .symcalc import ZERO, Expr, Y, as_expr, asarray, build, differentiate, esum, zeros


@dataclass(frozen=True, eq=False)
class HorizontalEndo:
    """h = (X_b + B^a_b V_a) ⊗ X^b over the algebroid ``A``."""

    A: LieAlgebroid
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "B", asarray(self.B).reshape(self.A.n, self.A.n))

    @property
    def n(self) -> int:
        return self.A.n

    def anchor_delta(self, a: int, f: Expr) -> Expr:
        """ρ_£(δ_a) f = ρ^i_a ∂f/∂x^i + B^μ_a ∂f/∂y^μ."""
        return self.A.anchor(a, f) + esum(
            self.B[mu, a] * differentiate(f, Y(mu)) for mu in range(self.n) if self.B[mu, a] is not ZERO
        )

    def dB(self) -> np.ndarray:
        """∂B^a_b/∂y^c, indexed [a, b, c]."""
        n = self.n
        return build((n, n, n), lambda a, b, c: differentiate(self.B[a, b], Y(c)))


def matrix(h: HorizontalEndo) -> np.ndarray:
    n = h.n
    M = zeros(2 * n, 2 * n)
    for b in range(n):
        M[b, b] = as_expr(1)
        for a in range(n):
            M[n + a, b] = h.B[a, b]
    return M


def vertical_projector(h: HorizontalEndo) -> np.ndarray:
    """v = Id − h."""
    n = h.n
    M = zeros(2 * n, 2 * n)
    for a in range(n):
        M[n + a, n + a] = as_expr(1)
        for b in range(n):
            M[n + a, b] = -h.B[a, b]
    return M


def semibasic11(n: int, block) -> np.ndarray:
    """The (1,1)-tensor block[a, b] V_a ⊗ X^b."""
    M = zeros(2 * n, 2 * n)
    M[n:, :n] = asarray(block)
    return M


def semibasic12(n: int, block) -> np.ndarray:
    """The (1,2)-tensor with T(X_a, X_b) = block[g, a, b] V_g and all other entries zero."""
    T = zeros(2 * n, 2 * n, 2 * n)
    T[n:, :n, :n] = asarray(block)
    return T


# ---------------------------------------------------------------------------
# tension, torsions, curvature
# ---------------------------------------------------------------------------


def tension_block(h: HorizontalEndo) -> np.ndarray:
    """H^a_b = B^a_b − y^c ∂B^a_b/∂y^c."""
    n = h.n
    return build((n, n), lambda a, b: h.B[a, b] - euler(n, h.B[a, b]))


def tension(h: HorizontalEndo) -> np.ndarray:
    return semibasic11(h.n, tension_block(h))


def weak_torsion_block(h: HorizontalEndo) -> np.ndarray:
    """t^g_{ab} = ∂B^g_b/∂y^a − ∂B^g_a/∂y^b − L^g_{ab}."""
    n = h.n
    return build(
        (n, n, n),
        lambda g, a, b: differentiate(h.B[g, b], Y(a)) - differentiate(h.B[g, a], Y(b)) - h.A.L[g, a, b],
    )


def weak_torsion(h: HorizontalEndo) -> np.ndarray:
    return semibasic12(h.n, weak_torsion_block(h))


def strong_torsion_block(h: HorizontalEndo) -> np.ndarray:
    """T^a_b = B^a_b − y^c ∂B^a_c/∂y^b − y^c L^a_{cb}."""
    n = h.n
    L = h.A.L
    return build(
        (n, n),
        lambda a, b: h.B[a, b]
        - esum(Y(c) * differentiate(h.B[a, c], Y(b)) for c in range(n))
        - esum(Y(c) * L[a, c, b] for c in range(n)),
    )


def strong_torsion(h: HorizontalEndo) -> np.ndarray:
    return semibasic11(h.n, strong_torsion_block(h))


def curvature_coefficients(h: HorizontalEndo) -> np.ndarray:
    """R^g_{ab} = ρ_a∂B^g_b − ρ_b∂B^g_a + B^l_a ∂B^g_b/∂y^l − B^l_b ∂B^g_a/∂y^l − L^l_{ab} B^g_l.

    With this sign ``[δ_a, δ_b] = L^g_{ab} δ_g + R^g_{ab} V_g``.
    """
    n = h.n
    B, L, A = h.B, h.A.L, h.A
    return build(
        (n, n, n),
        lambda g, a, b: A.anchor(a, B[g, b])
        - A.anchor(b, B[g, a])
        + esum(B[l, a] * differentiate(B[g, b], Y(l)) for l in range(n))
        - esum(B[l, b] * differentiate(B[g, a], Y(l)) for l in range(n))
        - esum(L[l, a, b] * B[g, l] for l in range(n)),
    )


def curvature(h: HorizontalEndo) -> np.ndarray:
    """Ω as a (1,2)-tensor: Ω(X_a, X_b) = −R^g_{ab} V_g."""
    return semibasic12(h.n, -curvature_coefficients(h))


# ---------------------------------------------------------------------------
# semisprays
# ---------------------------------------------------------------------------


def associated_semispray(h: HorizontalEndo) -> np.ndarray:
    """y^a X_a + y^b B^a_b V_a."""
    n = h.n
    S = zeros(2 * n)
    for a in range(n):
        S[a] = Y(a)
        S[n + a] = esum(Y(b) * h.B[a, b] for b in range(n))
    return S


def from_semispray(A: LieAlgebroid, S) -> HorizontalEndo:
    """Horizontal endomorphism generated by a semispray: B^g_a = ½(∂S^g/∂y^a − y^b L^g_{ab})."""
    n = A.n
    S = asarray(S)
    return HorizontalEndo(
        A,
        build(
            (n, n),
            lambda g, a: 0.5 * (differentiate(S[n + g], Y(a)) - esum(Y(b) * A.L[g, a, b] for b in range(n))),
        ),
    )


def contract_semispray(S, T) -> np.ndarray:
    """i_S T for a (1,2)-tensor T."""
    return contract_first(S, T)


def spray_endo_prediction(h: HorizontalEndo, S=None) -> np.ndarray:
    """B-block of h − ½ i_S t (S defaults to the associated semispray)."""
    n = h.n
    S = associated_semispray(h) if S is None else asarray(S)
    t = weak_torsion_block(h)
    return build(
        (n, n),
        lambda g, b: h.B[g, b] - 0.5 * esum(S[a] * t[g, a, b] for a in range(n)),
    )


# ---------------------------------------------------------------------------
# almost complex structure, adapted frame, horizontal lift
# ---------------------------------------------------------------------------


def almost_complex(h: HorizontalEndo) -> np.ndarray:
    """F = −(B^g_a(X_g + B^b_g V_b) + V_a) ⊗ X^a + (X_a + B^b_a V_b) ⊗ V^a."""
    n = h.n
    B = h.B
    F = zeros(2 * n, 2 * n)
    for a in range(n):
        for g in range(n):
            F[g, a] = -B[g, a]
        for b in range(n):
            F[n + b, a] = -esum(B[g, a] * B[b, g] for g in range(n)) - (1.0 if a == b else 0.0)
        F[a, n + a] = as_expr(1)
        for b in range(n):
            F[n + b, n + a] = B[b, a]
    return F


def adapted_frame(h: HorizontalEndo) -> tuple[np.ndarray, np.ndarray]:
    """(P, P⁻¹): columns of P are δ_1..δ_n, V_1..V_n in the frame {X_α, V_α}."""
    n = h.n
    P, Q = zeros(2 * n, 2 * n), zeros(2 * n, 2 * n)
    for a in range(2 * n):
        P[a, a] = as_expr(1)
        Q[a, a] = as_expr(1)
    for a in range(n):
        for b in range(n):
            P[n + a, b] = h.B[a, b]
            Q[n + a, b] = -h.B[a, b]
    return P, Q


def delta(h: HorizontalEndo, a: int) -> np.ndarray:
    """δ_a = X_a + B^b_a V_b."""
    n = h.n
    s = zeros(2 * n)
    s[a] = as_expr(1)
    for b in range(n):
        s[n + b] = h.B[b, a]
    return s


def adapted_section(h: HorizontalEndo, a: int) -> np.ndarray:
    """Adapted frame element: δ_a for a < n, V_{a-n} otherwise."""
    n = h.n
    if a < n:
        return delta(h, a)
    s = zeros(2 * n)
    s[a] = as_expr(1)
    return s


def horizontal_lift(h: HorizontalEndo, Xs) -> np.ndarray:
    """X^h = X^a (X_a + B^b_a V_b)."""
    n = h.n
    Xs = asarray(Xs)
    s = zeros(2 * n)
    for a in range(n):
        s[a] = Xs[a]
    for b in range(n):
        s[n + b] = esum(Xs[a] * h.B[b, a] for a in range(n))
    return s


def liouville_section(h: HorizontalEndo) -> np.ndarray:
    return liouville(h.n)
