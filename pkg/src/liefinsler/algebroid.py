"""Lie algebroid structure data on a local trivialisation.

A Lie algebroid of rank ``n`` over an ``m``-dimensional base is described by
its anchor components ``rho[i, a]`` (ρ^i_α) and structure functions
``L[g, a, b]`` (L^γ_{αβ}), all functions of the base coordinates only.
Sections of ``E`` are length-``n`` expression arrays in ``x``.

Sections of the prolongation are length-``2n`` arrays in the frame
``{X_1..X_n, V_1..V_n}``; :func:`lift_section` produces them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Tolerances
from .numeric import Residual, residual, zero_residual
from .symcalc import ZERO, Evaluator, Expr, X, Y, as_expr, asarray, build, differentiate, esum

_Y_BITS = ((1 << 31) - 1) << 32


class AlgebroidError(ValueError):
    """Structure data violates a load-time requirement."""


def depends_on_fiber(e: Expr) -> bool:
    return bool(e.varmask & _Y_BITS)


@dataclass(frozen=True, eq=False)
class LieAlgebroid:
    """Anchor ``rho`` (m×n) and structure functions ``L`` (n×n×n) with
    ``L[g, a, b] = L^g_{ab}``.

    With ``strict`` (the default) ``L`` must be antisymmetric in its lower
    indices: exactly when symbolically evident, otherwise to within
    ``antisymmetry_load`` at ``probe`` sample points supplied by the caller.
    Non-strict construction exists so that broken data can be diagnosed by
    :func:`verify_algebroid` instead of being rejected.
    """

    m: int
    n: int
    rho: np.ndarray
    L: np.ndarray
    strict: bool = True
    probe: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        rho = asarray(self.rho).reshape(self.m, self.n)
        L = asarray(self.L).reshape(self.n, self.n, self.n)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "L", L)
        for e in list(rho.flat) + list(L.flat):
            if depends_on_fiber(e):
                raise AlgebroidError("anchor and structure functions must depend on x only")
        if self.strict:
            bad = self._antisymmetry_defects()
            if bad:
                if self.probe is None:
                    raise AlgebroidError(f"structure functions not antisymmetric at {bad[0]}")
                ev = Evaluator(*self.probe)
                r = zero_residual(self.antisymmetry_tensor(), ev)
                if r.max > DEFAULT.tol.antisymmetry_load:
                    raise AlgebroidError(
                        f"structure functions not antisymmetric (residual {r.max:.3g})"
                    )

    # ------------------------------------------------------------------
    def _antisymmetry_defects(self) -> list[tuple[int, int, int]]:
        out = []
        for g in range(self.n):
            for a in range(self.n):
                for b in range(a, self.n):
                    if (self.L[g, a, b] + self.L[g, b, a]) is not ZERO:
                        out.append((g + 1, a + 1, b + 1))
        return out

    def antisymmetry_tensor(self) -> np.ndarray:
        return build((self.n,) * 3, lambda g, a, b: self.L[g, a, b] + self.L[g, b, a])

    def anchor(self, a: int, f: Expr) -> Expr:
        """ρ(e_a) f = ρ^i_a ∂f/∂x^i (x-derivatives only, also for f on E)."""
        return esum(self.rho[i, a] * differentiate(f, X(i)) for i in range(self.m))

    def anchor_section(self, Xs, f: Expr) -> Expr:
        """ρ(X) f for a section X = X^a e_a."""
        return esum(as_expr(Xs[a]) * self.anchor(a, f) for a in range(self.n))

    # structure equations ------------------------------------------------
    def structure_i(self) -> np.ndarray:
        """ρ^j_a ∂_j ρ^i_b − ρ^j_b ∂_j ρ^i_a − ρ^i_g L^g_{ab}, indexed [i, a, b]."""
        return build(
            (self.m, self.n, self.n),
            lambda i, a, b: self.anchor(a, self.rho[i, b])
            - self.anchor(b, self.rho[i, a])
            - esum(self.rho[i, g] * self.L[g, a, b] for g in range(self.n)),
        )

    def structure_ii(self) -> np.ndarray:
        """Cyclic sum over (a, b, c) of ρ^i_a ∂_i L^ν_{bc} + L^ν_{aμ} L^μ_{bc}, indexed [ν, a, b, c]."""
        n = self.n

        def term(nu, a, b, c):
            return self.anchor(a, self.L[nu, b, c]) + esum(
                self.L[nu, a, mu] * self.L[mu, b, c] for mu in range(n)
            )

        return build(
            (n, n, n, n),
            lambda nu, a, b, c: term(nu, a, b, c) + term(nu, b, c, a) + term(nu, c, a, b),
        )


@dataclass(frozen=True)
class AlgebroidReport:
    anchor_homomorphism: Residual
    jacobi: Residual
    antisymmetry: Residual
    passed: bool

    @property
    def residuals(self) -> dict[str, Residual]:
        return {
            "structure_i": self.anchor_homomorphism,
            "structure_ii": self.jacobi,
            "antisymmetry": self.antisymmetry,
        }


def verify_algebroid(A: LieAlgebroid, x, tol: Tolerances | float = DEFAULT.tol) -> AlgebroidReport:
    """Residuals of both structure equations and of antisymmetry at base points ``x``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    ev = Evaluator(x, np.zeros((x.shape[0], A.n)))
    r1 = zero_residual(A.structure_i(), ev)
    r2 = zero_residual(A.structure_ii(), ev)
    r3 = zero_residual(A.antisymmetry_tensor(), ev)
    passed = all(r.passes(tol) for r in (r1, r2, r3))
    return AlgebroidReport(r1, r2, r3, passed)


# ---------------------------------------------------------------------------
# sections of E
# ---------------------------------------------------------------------------


def section(A: LieAlgebroid, comps) -> np.ndarray:
    s = asarray(comps).reshape(A.n)
    for e in s:
        if depends_on_fiber(e):
            raise AlgebroidError("sections of E must depend on x only")
    return s


def bracket_E(A: LieAlgebroid, Xs, Ys) -> np.ndarray:
    """[X, Y]_E^g = X^a ρ^i_a ∂_i Y^g − Y^b ρ^i_b ∂_i X^g + X^a Y^b L^g_{ab}."""
    n = A.n
    Xs, Ys = asarray(Xs), asarray(Ys)
    return build(
        (n,),
        lambda g: A.anchor_section(Xs, Ys[g])
        - A.anchor_section(Ys, Xs[g])
        + esum(Xs[a] * Ys[b] * A.L[g, a, b] for a in range(n) for b in range(n)),
    )


def anchor_vector_field(A: LieAlgebroid, Xs) -> np.ndarray:
    """Components ρ(X)^i = ρ^i_a X^a of the vector field on the base."""
    return build((A.m,), lambda i: esum(A.rho[i, a] * Xs[a] for a in range(A.n)))


def lift_function(A: LieAlgebroid, f: Expr, kind: str) -> Expr:
    """Vertical lift f∘π, or complete lift f^c = y^a ρ^i_a ∂f/∂x^i."""
    if depends_on_fiber(f):
        raise AlgebroidError("only functions on the base can be lifted")
    if kind == "vertical":
        return f
    if kind == "complete":
        return esum(Y(a) * A.anchor(a, f) for a in range(A.n))
    raise ValueError(f"unknown lift kind {kind!r}")


def covariant_components(A: LieAlgebroid, Xs) -> np.ndarray:
    """X^a_{|b} = ρ^j_b ∂_j X^a − X^g L^a_{gb}, indexed [a, b]."""
    n = A.n
    return build(
        (n, n),
        lambda a, b: A.anchor(b, Xs[a]) - esum(Xs[g] * A.L[a, g, b] for g in range(n)),
    )


def lift_section(A: LieAlgebroid, Xs, kind: str) -> np.ndarray:
    """Vertical or complete lift of a section of E to the prolongation frame."""
    n = A.n
    Xs = section(A, Xs)
    if kind == "vertical":
        return np.concatenate([asarray([0] * n), Xs])
    if kind == "complete":
        D = covariant_components(A, Xs)
        vpart = build((n,), lambda a: esum(Y(b) * D[a, b] for b in range(n)))
        return np.concatenate([Xs.copy(), vpart])
    raise ValueError(f"unknown lift kind {kind!r}")


def d_E_function(A: LieAlgebroid, f: Expr) -> np.ndarray:
    """(d^E f)_a = ρ^i_a ∂f/∂x^i."""
    return build((A.n,), lambda a: A.anchor(a, f))


def d_E_oneform(A: LieAlgebroid, omega) -> np.ndarray:
    """Values (d^E ω)(e_b, e_c) of the exterior derivative of ω = ω_g e^g.

    Built from the wedge-coefficient form ``c_{bc} = ρ^i_b ∂_i ω_c −
    ½ ω_a L^a_{bc}`` multiplying ``e^b ∧ e^c``; the value on a frame pair is
    ``c_{bc} − c_{cb}``.
    """
    n = A.n
    omega = asarray(omega)

    def coeff(b, c):
        return A.anchor(b, omega[c]) - 0.5 * esum(omega[a] * A.L[a, b, c] for a in range(n))

    return build((n, n), lambda b, c: coeff(b, c) - coeff(c, b))


def jacobi_residual(A: LieAlgebroid, Xs, Ys, Zs) -> np.ndarray:
    """Components of the cyclic sum [X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]."""
    return (
        bracket_E(A, Xs, bracket_E(A, Ys, Zs))
        + bracket_E(A, Ys, bracket_E(A, Zs, Xs))
        + bracket_E(A, Zs, bracket_E(A, Xs, Ys))
    )


def anchor_homomorphism_residual(A: LieAlgebroid, Xs, Ys, ev: Evaluator) -> Residual:
    """ρ([X,Y]_E) against the commutator of the vector fields ρ(X), ρ(Y)."""
    U, W = anchor_vector_field(A, Xs), anchor_vector_field(A, Ys)
    comm = build(
        (A.m,),
        lambda i: esum(
            U[j] * differentiate(W[i], X(j)) - W[j] * differentiate(U[i], X(j)) for j in range(A.m)
        ),
    )
    return residual(anchor_vector_field(A, bracket_E(A, Xs, Ys)), comm, ev)
