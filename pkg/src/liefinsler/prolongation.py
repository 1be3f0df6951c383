"""Calculus on the prolongation of a Lie algebroid in the frame {X_α, V_α}.

Conventions (fixed throughout the package):

* a section is a length-``2n`` expression array; entries ``0..n-1`` are the
  ``X_α`` components and ``n..2n-1`` the ``V_α`` components;
* a (1,1)-tensor is a ``(2n, 2n)`` array ``K[a, b] = K^a_b``, so that
  ``K(e_b) = K[a, b] e_a`` and application is a matrix-vector product;
* a (1,2)-tensor is a ``(2n, 2n, 2n)`` array ``T[c, a, b] = T(e_a, e_b)^c``;
* a 2-form is a ``(2n, 2n)`` array ``w[a, b] = w(e_a, e_b)``.

The anchor is ``ρ_£(X_α) = ρ^i_α ∂/∂x^i`` and ``ρ_£(V_α) = ∂/∂y^α``; the only
non-zero frame brackets are ``[X_α, X_β] = L^γ_{αβ} X_γ``.
"""

from __future__ import annotations

import numpy as np

from .algebroid import LieAlgebroid, covariant_components
from .symcalc import ZERO, Expr, Y, as_expr, asarray, build, differentiate, esum, zeros


# ---------------------------------------------------------------------------
# frame, anchor and bracket
# ---------------------------------------------------------------------------


def frame_section(n: int, a: int) -> np.ndarray:
    """The frame element e_a (X_a for a < n, V_{a-n} otherwise)."""
    s = zeros(2 * n)
    s[a] = as_expr(1)
    return s


def anchor_prolong(A: LieAlgebroid, S, f: Expr) -> Expr:
    """ρ_£(S) f = Z^α ρ^i_α ∂f/∂x^i + W^α ∂f/∂y^α for S = Z^α X_α + W^α V_α."""
    n = A.n
    terms = []
    for a in range(n):
        z, w = as_expr(S[a]), as_expr(S[n + a])
        if z is not ZERO:
            terms.append(z * A.anchor(a, f))
        if w is not ZERO:
            terms.append(w * differentiate(f, Y(a)))
    return esum(terms)


def anchor_frame(A: LieAlgebroid, a: int, f: Expr) -> Expr:
    """ρ_£(e_a) f for a frame index a."""
    n = A.n
    return A.anchor(a, f) if a < n else differentiate(f, Y(a - n))


def bracket_prolong(A: LieAlgebroid, U, W) -> np.ndarray:
    """Bracket of two prolongation sections (Leibniz extension of the frame brackets)."""
    n = A.n
    U, W = asarray(U), asarray(W)

    def comp(c):
        e = anchor_prolong(A, U, W[c]) - anchor_prolong(A, W, U[c])
        if c < n:
            e = e + esum(
                U[a] * W[b] * A.L[c, a, b]
                for a in range(n)
                for b in range(n)
                if U[a] is not ZERO and W[b] is not ZERO
            )
        return e

    return build((2 * n,), comp)


def frame_structure(A: LieAlgebroid) -> np.ndarray:
    """Structure functions of the frame: [e_a, e_b] = c[k, a, b] e_k."""
    n = A.n
    c = zeros(2 * n, 2 * n, 2 * n)
    c[:n, :n, :n] = A.L
    return c


# ---------------------------------------------------------------------------
# tensor algebra
# ---------------------------------------------------------------------------


def apply(K, S) -> np.ndarray:
    """K(S) for a (1,1)-tensor K."""
    K, S = asarray(K), asarray(S)
    N = K.shape[0]
    return build((N,), lambda a: esum(K[a, b] * S[b] for b in range(N) if S[b] is not ZERO))


def compose(K, M) -> np.ndarray:
    """Matrix of K∘M."""
    K, M = asarray(K), asarray(M)
    N = K.shape[0]
    return build(
        (N, N),
        lambda a, b: esum(K[a, c] * M[c, b] for c in range(N) if K[a, c] is not ZERO),
    )


def identity(n: int) -> np.ndarray:
    return build((2 * n, 2 * n), lambda a, b: 1.0 if a == b else 0.0)


def apply12(T, U, W) -> np.ndarray:
    """T(U, W) for a (1,2)-tensor T."""
    T, U, W = asarray(T), asarray(U), asarray(W)
    N = T.shape[0]
    return build(
        (N,),
        lambda c: esum(
            T[c, a, b] * U[a] * W[b]
            for a in range(N)
            for b in range(N)
            if U[a] is not ZERO and W[b] is not ZERO
        ),
    )


def contract_first(S, T) -> np.ndarray:
    """i_S T: the (1,1)-tensor X̃ ↦ T(S, X̃)."""
    S, T = asarray(S), asarray(T)
    N = T.shape[0]
    return build(
        (N, N), lambda c, b: esum(S[a] * T[c, a, b] for a in range(N) if S[a] is not ZERO)
    )


def compose_12(K, T) -> np.ndarray:
    """K∘T for a (1,1)-tensor K and (1,2)-tensor T."""
    K, T = asarray(K), asarray(T)
    N = T.shape[0]
    return build(
        (N, N, N),
        lambda c, a, b: esum(K[c, d] * T[d, a, b] for d in range(N) if K[c, d] is not ZERO),
    )


# ---------------------------------------------------------------------------
# canonical objects
# ---------------------------------------------------------------------------


def vertical_endomorphism(n: int) -> np.ndarray:
    """J = V_α ⊗ X^α: J(X_α) = V_α, J(V_α) = 0."""
    J = zeros(2 * n, 2 * n)
    for a in range(n):
        J[n + a, a] = as_expr(1)
    return J


def liouville(n: int) -> np.ndarray:
    """C = y^α V_α."""
    C = zeros(2 * n)
    for a in range(n):
        C[n + a] = Y(a)
    return C


def semispray(n: int, S_comps) -> np.ndarray:
    """The semispray y^α X_α + S^α V_α with the given V-components."""
    out = zeros(2 * n)
    for a in range(n):
        out[a] = Y(a)
        out[n + a] = as_expr(S_comps[a])
    return out


def semispray_defect(n: int, S) -> np.ndarray:
    """Components of J(S) − C (zero iff S is a semispray)."""
    return apply(vertical_endomorphism(n), S) - liouville(n)


def spray_defect(n: int, S) -> np.ndarray:
    """2S^β − y^α ∂S^β/∂y^α for the V-components of S."""
    S = asarray(S)
    return build((n,), lambda b: 2 * S[n + b] - euler(n, S[n + b]))


def euler(n: int, f: Expr) -> Expr:
    """y^α ∂f/∂y^α."""
    return esum(Y(a) * differentiate(f, Y(a)) for a in range(n))


def homogeneity_defect_function(n: int, f: Expr, r: float) -> Expr:
    """y^α ∂f/∂y^α − r f."""
    return euler(n, f) - r * as_expr(f)


def homogeneity_defect_section(n: int, S, r: float) -> np.ndarray:
    """Defects of y^α∂X̃^β/∂y^α = (r−1)X̃^β and y^α∂Ỹ^β/∂y^α = rỸ^β."""
    S = asarray(S)
    return build(
        (2 * n,),
        lambda c: euler(n, S[c]) - ((r - 1) if c < n else r) * S[c],
    )


def projective_change(n: int, S, f: Expr) -> np.ndarray:
    """S + f̃ C."""
    return asarray(S) + as_expr(f) * liouville(n)


# ---------------------------------------------------------------------------
# symmetries
# ---------------------------------------------------------------------------


def lie_symmetry_defect(A: LieAlgebroid, S, Xs) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of [S, X^C] in closed form: (X-part, V-part).

    V-part: y^β y^λ ρ_λ ∂(X^α_{|β}) − X^λ ρ_λ ∂S^α + S^λ X^α_{|λ} − y^β X^λ_{|β} ∂S^α/∂y^λ;
    X-part: y^λ ρ_λ ∂X^α + y^σ X^λ L^α_{σλ} − y^β X^α_{|β} (expected to vanish).
    """
    n = A.n
    S = asarray(S)
    Xs = asarray(Xs)
    D = covariant_components(A, Xs)
    Sv = S[n:]

    def xpart(a):
        return (
            esum(Y(l) * A.anchor(l, Xs[a]) for l in range(n))
            + esum(Y(s) * Xs[l] * A.L[a, s, l] for s in range(n) for l in range(n))
            - esum(Y(b) * D[a, b] for b in range(n))
        )

    def vpart(a):
        return (
            esum(Y(b) * Y(l) * A.anchor(l, D[a, b]) for b in range(n) for l in range(n))
            - esum(Xs[l] * A.anchor(l, Sv[a]) for l in range(n))
            + esum(Sv[l] * D[a, l] for l in range(n))
            - esum(Y(b) * D[l, b] * differentiate(Sv[a], Y(l)) for b in range(n) for l in range(n))
        )

    return build((n,), xpart), build((n,), vpart)


def dynamical_symmetry_defect(A: LieAlgebroid, S, T) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form coefficients of [S, X̃] for X̃ = X̃^α X_α + Ỹ^α V_α: (X-part, V-part)."""
    n = A.n
    S, T = asarray(S), asarray(T)
    Xt, Yt, Sv = T[:n], T[n:], S[n:]

    def xpart(a):
        return (
            anchor_prolong(A, S, Xt[a])
            + esum(Xt[b] * Y(g) * A.L[a, g, b] for b in range(n) for g in range(n))
            - Yt[a]
        )

    def vpart(a):
        return (
            esum(Y(b) * A.anchor(b, Yt[a]) for b in range(n))
            - esum(Xt[b] * A.anchor(b, Sv[a]) for b in range(n))
            + esum(Sv[b] * differentiate(Yt[a], Y(b)) for b in range(n))
            - esum(Yt[b] * differentiate(Sv[a], Y(b)) for b in range(n))
        )

    return build((n,), xpart), build((n,), vpart)


# ---------------------------------------------------------------------------
# Frölicher–Nijenhuis brackets for (1,1)-tensors
# ---------------------------------------------------------------------------


def fn_bracket_section(A: LieAlgebroid, K, Yt) -> np.ndarray:
    """[K, Y]^{F-N}(X) = [K X, Y] − K[X, Y], assembled on frame elements."""
    n = A.n
    K = asarray(K)
    out = zeros(2 * n, 2 * n)
    for b in range(2 * n):
        e = frame_section(n, b)
        col = bracket_prolong(A, K[:, b], Yt) - apply(K, bracket_prolong(A, e, Yt))
        out[:, b] = col
    return out


def fn_bracket_tensor(A: LieAlgebroid, K, M) -> np.ndarray:
    """[K, M]^{F-N}(X, Y) = [KX, MY] + [MX, KY] + (KM + MK)[X, Y] − K[X, MY] − K[MX, Y]
    − M[X, KY] − M[KX, Y], assembled on frame pairs."""
    n = A.n
    N = 2 * n
    K, M = asarray(K), asarray(M)
    KM_MK = compose(K, M) + compose(M, K)
    out = zeros(N, N, N)
    br = lambda U, W: bracket_prolong(A, U, W)
    for a in range(N):
        ea = frame_section(n, a)
        for b in range(a + 1, N):
            eb = frame_section(n, b)
            val = (
                br(K[:, a], M[:, b])
                + br(M[:, a], K[:, b])
                + apply(KM_MK, br(ea, eb))
                - apply(K, br(ea, M[:, b]))
                - apply(K, br(M[:, a], eb))
                - apply(M, br(ea, K[:, b]))
                - apply(M, br(K[:, a], eb))
            )
            out[:, a, b] = val
            out[:, b, a] = -val
    return out


# ---------------------------------------------------------------------------
# forms on the prolongation
# ---------------------------------------------------------------------------


def d_function(A: LieAlgebroid, f: Expr) -> np.ndarray:
    """(d^£ f)(e_a) = ρ_£(e_a) f."""
    return build((2 * A.n,), lambda a: anchor_frame(A, a, f))


def d_oneform(A: LieAlgebroid, theta) -> np.ndarray:
    """(dθ)(e_a, e_b) = ρ_£(e_a)θ_b − ρ_£(e_b)θ_a − θ([e_a, e_b])."""
    n = A.n
    theta = asarray(theta)
    c = frame_structure(A)
    return build(
        (2 * n, 2 * n),
        lambda a, b: anchor_frame(A, a, theta[b])
        - anchor_frame(A, b, theta[a])
        - esum(theta[k] * c[k, a, b] for k in range(n)),
    )


def form_on(w, U, W) -> Expr:
    """w(U, W) for a 2-form (or bilinear form) w."""
    w, U, W = asarray(w), asarray(U), asarray(W)
    N = w.shape[0]
    return esum(
        U[a] * w[a, b] * W[b]
        for a in range(N)
        for b in range(N)
        if U[a] is not ZERO and W[b] is not ZERO
    )


def interior(U, w) -> np.ndarray:
    """(i_U w)(e_b) = w(U, e_b)."""
    U, w = asarray(U), asarray(w)
    N = w.shape[0]
    return build((N,), lambda b: esum(U[a] * w[a, b] for a in range(N) if U[a] is not ZERO))


def interior_tensor(K, w) -> np.ndarray:
    """(i_K w)(X, Y) = w(KX, Y) + w(X, KY) for a (1,1)-tensor K."""
    K, w = asarray(K), asarray(w)
    N = w.shape[0]
    return build(
        (N, N),
        lambda a, b: esum(K[c, a] * w[c, b] for c in range(N) if K[c, a] is not ZERO)
        + esum(w[a, c] * K[c, b] for c in range(N) if K[c, b] is not ZERO),
    )


def lie_derivative_2form(A: LieAlgebroid, U, w) -> np.ndarray:
    """(£_U w)(e_a, e_b) = ρ_£(U) w_ab − w([U, e_a], e_b) − w(e_a, [U, e_b])."""
    n = A.n
    N = 2 * n
    w = asarray(w)
    brs = [bracket_prolong(A, U, frame_section(n, a)) for a in range(N)]
    return build(
        (N, N),
        lambda a, b: anchor_prolong(A, U, w[a, b])
        - esum(brs[a][c] * w[c, b] for c in range(N) if brs[a][c] is not ZERO)
        - esum(w[a, c] * brs[b][c] for c in range(N) if brs[b][c] is not ZERO),
    )
