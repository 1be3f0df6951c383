"""Linear connections on E, the horizontal endomorphisms they generate, and
the Ichijyō / generalized Berwald / Wagner classification machinery.

A linear connection ``∇_{e_a} e_b = Γ^g_{ab} e_g`` is stored as
``Gamma[g, a, b]`` with entries depending on the base coordinates only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebroid import AlgebroidError, LieAlgebroid, d_E_function, depends_on_fiber, lift_function
from .config import DEFAULT, Tolerances
from .connections import (
    DConnection,
    associated_mixed_curvature,
    covariant_derivative,
    torsion_components,
)
from .finsler import (
    FinslerStructure,
    barthel,
    canonical_spray,
    conservativity_defect,
    first_cartan,
    gradient,
    metricity,
    second_cartan,
)
from .horizontal import (
    HorizontalEndo,
    associated_semispray,
    curvature_coefficients,
    delta,
    matrix,
)
from .numeric import Residual, residual
from .prolongation import bracket_prolong, fn_bracket_section, frame_section, liouville, vertical_endomorphism
from .symcalc import Evaluator, Y, asarray, build, differentiate, esum, zeros


@dataclass(frozen=True, eq=False)
class LinearConnectionE:
    """Γ^g_{ab} of a linear connection on E, indexed [g, a, b]."""

    A: LieAlgebroid
    Gamma: np.ndarray

    def __post_init__(self):
        G = asarray(self.Gamma).reshape(self.A.n, self.A.n, self.A.n)
        for e in G.flat:
            if depends_on_fiber(e):
                raise AlgebroidError("linear connection coefficients must depend on x only")
        object.__setattr__(self, "Gamma", G)

    @property
    def n(self) -> int:
        return self.A.n

    def torsion(self) -> np.ndarray:
        """T^g_{ab} = Γ^g_{ab} − Γ^g_{ba} − L^g_{ab}."""
        G, L = self.Gamma, self.A.L
        return build((self.n,) * 3, lambda g, a, b: G[g, a, b] - G[g, b, a] - L[g, a, b])

    def curvature(self) -> np.ndarray:
        """K^l_{abg} = ρ_a Γ^l_{bg} − ρ_b Γ^l_{ag} + Γ^m_{bg}Γ^l_{am} − Γ^m_{ag}Γ^l_{bm} − L^m_{ab}Γ^l_{mg},
        indexed [l, a, b, g]."""
        A, G, n = self.A, self.Gamma, self.n
        return build(
            (n, n, n, n),
            lambda l, a, b, g: A.anchor(a, G[l, b, g])
            - A.anchor(b, G[l, a, g])
            + esum(G[m, b, g] * G[l, a, m] - G[m, a, g] * G[l, b, m] - A.L[m, a, b] * G[l, m, g] for m in range(n)),
        )

    def covariant(self, a: int, b: int) -> np.ndarray:
        """∇_{e_a} e_b as a section of E."""
        return self.Gamma[:, a, b].copy()


def h_from_nabla(nabla: LinearConnectionE) -> HorizontalEndo:
    """B^b_a = −y^g Γ^b_{ag}."""
    n = nabla.n
    G = nabla.Gamma
    return HorizontalEndo(nabla.A, build((n, n), lambda b, a: -esum(Y(g) * G[b, a, g] for g in range(n))))


def _dy(e, b):
    return differentiate(e, Y(b))


def nabla_from_h(h: HorizontalEndo) -> np.ndarray:
    """Γ^g_{ab} = −∂B^g_a/∂y^b (x-only exactly when h is generated by a linear connection)."""
    n = h.n
    return build((n, n, n), lambda g, a, b: -_dy(h.B[g, a], b))


def vertical_lift_check(nabla: LinearConnectionE, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """((∇_{e_a} e_b)^V, [e_a^{h_∇}, e_b^V]) for frame sections."""
    n = nabla.n
    h = h_from_nabla(nabla)
    lhs = zeros(2 * n)
    lhs[n:] = nabla.covariant(a, b)
    return lhs, bracket_prolong(nabla.A, delta(h, a), frame_section(n, n + b))


def nabla_curvature_relation(nabla: LinearConnectionE) -> tuple[np.ndarray, np.ndarray]:
    """(y^g K^l_{abg}, −R^l_{ab} of h_∇), both indexed [l, a, b]."""
    n = nabla.n
    K = nabla.curvature()
    lhs = build((n, n, n), lambda l, a, b: esum(Y(g) * K[l, a, b, g] for g in range(n)))
    R = curvature_coefficients(h_from_nabla(nabla))
    return lhs, -R


# ---------------------------------------------------------------------------
# Ichijyō connection
# ---------------------------------------------------------------------------


def ichijyo_connection(FS: FinslerStructure, nabla: LinearConnectionE) -> DConnection:
    """F = Γ∘π, C = first Cartan tensor, relative to h_∇."""
    return DConnection(h_from_nabla(nabla), nabla.Gamma, first_cartan(FS)[0], "ichijyo")


def ichijyo_curvature_closed(FS: FinslerStructure, nabla: LinearConnectionE):
    """Closed forms of the Ichijyō curvatures in terms of ∇, h_∇ and the Cartan tensor:
    R = −∂R^l_{ab}/∂y^g − R^m_{ab} C^l_{mg},
    P = ρ_a C^l_{bg} − y^ν Γ^m_{aν} ∂_m C^l_{bg} + C^m_{bg}Γ^l_{am} − Γ^m_{ag}C^l_{bm} − Γ^m_{ab}C^l_{mg},
    S = ∂_a C^l_{bg} + C^m_{bg}C^l_{am} − ∂_b C^l_{ag} − C^m_{ag}C^l_{bm}."""
    A, n, G = FS.A, FS.n, nabla.Gamma
    C = first_cartan(FS)[0]
    Rh = curvature_coefficients(h_from_nabla(nabla))
    rng = range(n)
    R = build(
        (n, n, n, n),
        lambda l, a, b, g: -_dy(Rh[l, a, b], g) - esum(Rh[m, a, b] * C[l, m, g] for m in rng),
    )
    P = build(
        (n, n, n, n),
        lambda l, a, b, g: A.anchor(a, C[l, b, g])
        - esum(Y(v) * G[m, a, v] * _dy(C[l, b, g], m) for v in rng for m in rng)
        + esum(C[m, b, g] * G[l, a, m] - G[m, a, g] * C[l, b, m] - G[m, a, b] * C[l, m, g] for m in rng),
    )
    S = build(
        (n, n, n, n),
        lambda l, a, b, g: _dy(C[l, b, g], a)
        - _dy(C[l, a, g], b)
        + esum(C[m, b, g] * C[l, a, m] - C[m, a, g] * C[l, b, m] for m in rng),
    )
    return R, P, S


def ichijyo_torsion_prediction(FS: FinslerStructure, nabla: LinearConnectionE) -> dict[str, np.ndarray]:
    """A = T_∇, B = −C, R¹ = −R (the curvature of h_∇), P¹ = 0, S¹ = 0; indexed [g, a, b]."""
    n = nabla.n
    return {
        "A": nabla.torsion(),
        "B": -first_cartan(FS)[0],
        "R1": -curvature_coefficients(h_from_nabla(nabla)),
        "P1": zeros(n, n, n),
        "S1": zeros(n, n, n),
    }


# ---------------------------------------------------------------------------
# h-basic d-connections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HBasicResult:
    residual: Residual
    h_basic: bool
    Gamma: np.ndarray | None


def is_h_basic(D: DConnection, ev: Evaluator, tol: Tolerances = DEFAULT.tol) -> HBasicResult:
    """h-basic iff the associated d-connection has vanishing mixed curvature (∂F/∂y = 0)."""
    r = residual(associated_mixed_curvature(D), 0, ev)
    ok = r.passes(tol)
    return HBasicResult(r, ok, D.F.copy() if ok else None)


def deflection_difference(D: DConnection, nabla: LinearConnectionE, a: int) -> tuple[np.ndarray, np.ndarray]:
    """(D_{δ_a} C, δ_a − δ_a^{h_∇}) for an h-basic D with base connection ∇."""
    lhs = covariant_derivative(D, delta(D.h, a), liouville(D.n))
    return lhs, delta(D.h, a) - delta(h_from_nabla(nabla), a)


def cartan_derivative_symmetry(D: DConnection, FS: FinslerStructure):
    """(D_{V_a} C)(ê_b, ê_g) and its (a, b)-swap for the Cartan tensor C of FS."""
    n = D.n
    C = first_cartan(FS)[0]

    def dC(l, a, b, g):
        return (
            _dy(C[l, b, g], a)
            + esum(C[m, b, g] * D.C[l, a, m] - D.C[m, a, b] * C[l, m, g] - D.C[m, a, g] * C[l, b, m] for m in range(n))
        )

    T = build((n, n, n, n), dC)
    return T, np.transpose(T, (0, 2, 1, 3))


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneralizedBerwaldReport:
    conservativity: Residual
    second_cartan: Residual
    h_metricity: Residual
    passes: tuple[bool, bool, bool]

    @property
    def agree(self) -> bool:
        return len(set(self.passes)) == 1

    @property
    def generalized_berwald(self) -> bool:
        return all(self.passes)


def generalized_berwald_report(
    FS: FinslerStructure, nabla: LinearConnectionE, ev: Evaluator, tol: Tolerances = DEFAULT.tol
) -> GeneralizedBerwaldReport:
    """Three equivalent characterisations: h_∇ conservative, C̃ of h_∇ zero,
    Ichijyō connection h-metrical."""
    h = h_from_nabla(nabla)
    r1 = residual(conservativity_defect(FS, h), 0, ev)
    r2 = residual(second_cartan(FS, h)[0], 0, ev)
    r3 = residual(metricity(ichijyo_connection(FS, nabla), FS)[0], 0, ev)
    return GeneralizedBerwaldReport(r1, r2, r3, (r1.passes(tol), r2.passes(tol), r3.passes(tol)))


def classify(FS: FinslerStructure, nabla: LinearConnectionE, ev: Evaluator, tol: Tolerances = DEFAULT.tol) -> dict:
    """Generalized Berwald, Berwald (plus torsion-free ∇) and locally Minkowski (plus flat ∇)."""
    gb = generalized_berwald_report(FS, nabla, ev, tol)
    rt = residual(nabla.torsion(), 0, ev)
    rk = residual(nabla.curvature(), 0, ev)
    berwald = gb.generalized_berwald and rt.passes(tol)
    return {
        "generalized_berwald": gb,
        "torsion": rt,
        "curvature": rk,
        "is_generalized_berwald": gb.generalized_berwald,
        "is_berwald": berwald,
        "is_minkowski": berwald and rk.passes(tol),
    }


# ---------------------------------------------------------------------------
# Wagner machinery
# ---------------------------------------------------------------------------


def _base_function(f):
    if depends_on_fiber(f):
        raise AlgebroidError("the Wagner function must depend on x only")
    return f


def hbar_deformation(nabla: LinearConnectionE, f) -> tuple[HorizontalEndo, LinearConnectionE]:
    """h̄ with B^b_a = −(y^b ρ_a f + y^l Γ^b_{al}) and Γ̄^g_{ab} = δ^g_b ρ_a f + Γ^g_{ab}."""
    f = _base_function(f)
    A, n, G = nabla.A, nabla.n, nabla.Gamma
    df = d_E_function(A, f)
    B = build((n, n), lambda b, a: -(Y(b) * df[a] + esum(Y(l) * G[b, a, l] for l in range(n))))
    Gb = build((n, n, n), lambda g, a, b: G[g, a, b] + (df[a] if g == b else 0.0))
    return HorizontalEndo(A, B), LinearConnectionE(A, Gb)


def wagner_torsion_target(A: LieAlgebroid, f) -> np.ndarray:
    """(d^E f(e_a) e_b − d^E f(e_b) e_a)^g, indexed [g, a, b]."""
    n = A.n
    df = d_E_function(A, f)
    return build(
        (n, n, n),
        lambda g, a, b: (df[a] if g == b else 0.0) - (df[b] if g == a else 0.0),
    )


@dataclass(frozen=True)
class WagnerReport:
    a_horizontal_torsion: Residual
    b_torsion_form: Residual
    c_decomposition: Residual
    d_spray: Residual
    tol: Tolerances

    @property
    def residuals(self) -> dict[str, Residual]:
        return {
            "a": self.a_horizontal_torsion,
            "b": self.b_torsion_form,
            "c": self.c_decomposition,
            "d": self.d_spray,
        }

    @property
    def passed(self) -> bool:
        return all(r.passes(self.tol) for r in self.residuals.values())


def wagner_sides(FS: FinslerStructure, nabla: LinearConnectionE, f) -> dict[str, tuple]:
    """Left and right sides of the four Wagner conditions.

    (a) h-horizontal torsion of the Ichijyō connection on (δ_a, δ_b) versus
        ρ_£(δ_a) f δ_b − ρ_£(δ_b) f δ_a;
    (b) T_∇ versus d^E f ∧ Id;
    (c) h_∇ versus h₀ + f^c J − F [J, grad f^∨] − d_J F ⊗ grad f^∨;
    (d) S_∇ versus S₀ + f^c C − 2F grad f^∨.
    """
    f = _base_function(f)
    A, n = FS.A, FS.n
    D = ichijyo_connection(FS, nabla)
    h = D.h
    Ahh = torsion_components(D)["A"]
    target_a = build(
        (n, n, n),
        lambda g, a, b: (h.anchor_delta(a, f) if g == b else 0.0) - (h.anchor_delta(b, f) if g == a else 0.0),
    )
    fc = lift_function(A, f, "complete")
    grad = gradient(FS, f)
    J = vertical_endomorphism(n)
    dJF = build((2 * n,), lambda b: _dy(FS.F, b) if b < n else 0.0)
    outer = build((2 * n, 2 * n), lambda a, b: grad[a] * dJF[b])
    rhs_c = matrix(barthel(FS)) + fc * J - FS.F * fn_bracket_section(A, J, grad) - outer
    rhs_d = canonical_spray(FS) + fc * liouville(n) - 2 * FS.F * grad
    return {
        "a": (Ahh, target_a),
        "b": (nabla.torsion(), wagner_torsion_target(A, f)),
        "c": (matrix(h), rhs_c),
        "d": (associated_semispray(h), rhs_d),
    }


def wagner_report(
    FS: FinslerStructure, nabla: LinearConnectionE, f, ev: Evaluator, tol: Tolerances = DEFAULT.tol
) -> WagnerReport:
    s = wagner_sides(FS, nabla, f)
    r = {k: residual(lhs, rhs, ev) for k, (lhs, rhs) in s.items()}
    return WagnerReport(r["a"], r["b"], r["c"], r["d"], tol)


def hbar_conservativity(FS: FinslerStructure, nabla: LinearConnectionE, f, ev: Evaluator):
    """(conservativity residual of h̄, max |ρ(e_a) f|): the first vanishes exactly with the second."""
    hb, _ = hbar_deformation(nabla, f)
    return residual(conservativity_defect(FS, hb), 0, ev), residual(d_E_function(FS.A, f), 0, ev)
