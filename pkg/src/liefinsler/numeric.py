"""Residual bookkeeping shared by every identity check."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Tolerances
from .symcalc import Evaluator, evaluate_tensor


@dataclass(frozen=True)
class Residual:
    """Per-point maximum absolute residual of an identity, plus a magnitude scale.

    ``scale`` is the largest absolute value among the compared quantities;
    it feeds the relative part of the pass rule.
    """

    per_point: np.ndarray
    scale: float

    @property
    def max(self) -> float:
        return float(np.max(self.per_point)) if self.per_point.size else 0.0

    def passes(self, tol: Tolerances | float) -> bool:
        if isinstance(tol, Tolerances):
            return self.max <= tol.identity_abs + tol.identity_rel * self.scale
        return self.max <= float(tol)

    def combine(self, other: "Residual") -> "Residual":
        return Residual(np.maximum(self.per_point, other.per_point), max(self.scale, other.scale))


def _per_point(arr: np.ndarray, P: int) -> np.ndarray:
    arr = np.abs(np.asarray(arr, dtype=float)).reshape(P, -1)
    if arr.shape[1] == 0:
        return np.zeros(P)
    return arr.max(axis=1)


def values(t, ev: Evaluator) -> np.ndarray:
    """Evaluate an expression tensor (or pass numeric arrays through)."""
    arr = np.asarray(t)
    if arr.dtype == object:
        return evaluate_tensor(arr, ev)
    return np.asarray(arr, dtype=float)


def residual(lhs, rhs, ev: Evaluator) -> Residual:
    """Residual of ``lhs = rhs`` where each side is an expression tensor or a
    numeric array of shape ``(P,) + shape``; ``rhs`` may be ``0``."""
    a = values(lhs, ev)
    if isinstance(rhs, (int, float)) and rhs == 0:
        b = np.zeros_like(a)
    else:
        b = values(rhs, ev)
    P = ev.size
    a = np.broadcast_to(a, np.broadcast_shapes(a.shape, b.shape))
    b = np.broadcast_to(b, a.shape)
    scale = float(max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0)))
    return Residual(_per_point(a - b, P), scale)


def zero_residual(t, ev: Evaluator) -> Residual:
    return residual(t, 0, ev)
