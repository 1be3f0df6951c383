"""Vectorised numeric evaluation of expression DAGs over batches of points.

An :class:`Evaluator` is bound to a batch of ``P`` points ``x`` (P×m) and
``y`` (P×n) and caches every node value it computes, so evaluating many
related expressions (all the components of a tensor, or an expression and
its derivatives) shares work.  Evaluators are cheap; create one per batch
and per thread.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..config import DEFAULT
from .expr import Add, Const, Expr, Func, InvEntry, InverseMatrix, Mul, Pow, Var, postorder


class DomainError(ValueError):
    """An expression was evaluated outside its domain (log/sqrt/division)."""


class SingularMatrixError(ArithmeticError):
    """A matrix to be inverted is singular or too ill-conditioned."""


class Evaluator:
    def __init__(self, x, y, *, max_condition: float | None = None):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        if x.shape[0] != y.shape[0]:
            if x.shape[0] == 1:
                x = np.repeat(x, y.shape[0], axis=0)
            elif y.shape[0] == 1:
                y = np.repeat(y, x.shape[0], axis=0)
            else:
                raise ValueError("x and y batches differ in length")
        self.x = x
        self.y = y
        self.size = x.shape[0]
        self.max_condition = DEFAULT.tol.max_condition if max_condition is None else max_condition
        self._cache: dict[Expr, np.ndarray] = {}
        self._inv: dict[int, np.ndarray] = {}

    # ------------------------------------------------------------------
    def __call__(self, e: Expr) -> np.ndarray:
        return self.evaluate(e)

    def evaluate(self, e: Expr) -> np.ndarray:
        """Values of ``e`` at every point of the batch, shape ``(P,)``."""
        hit = self._cache.get(e)
        if hit is not None:
            return hit
        self._fill([e])
        return self._cache[e]

    def evaluate_many(self, exprs: Iterable[Expr]) -> list[np.ndarray]:
        exprs = list(exprs)
        self._fill([e for e in exprs if e not in self._cache])
        return [self._cache[e] for e in exprs]

    # ------------------------------------------------------------------
    def _fill(self, roots: Sequence[Expr]) -> None:
        if not roots:
            return
        cache = self._cache
        P = self.size
        for node in postorder(roots):
            if node in cache:
                continue
            if isinstance(node, Const):
                val = np.full(P, node.value)
            elif isinstance(node, Var):
                src = self.x if node.space == "x" else self.y
                if node.index >= src.shape[1]:
                    raise IndexError(f"variable {node.name} outside the point dimension")
                val = src[:, node.index].copy()
            elif isinstance(node, Add):
                val = cache[node.terms[0]].copy()
                for t in node.terms[1:]:
                    val += cache[t]
            elif isinstance(node, Mul):
                val = cache[node.factors[0]].copy()
                for f in node.factors[1:]:
                    val *= cache[f]
            elif isinstance(node, Pow):
                val = self._pow(node, cache[node.base], cache[node.exp])
            elif isinstance(node, Func):
                val = self._func(node.name, cache[node.arg])
            elif isinstance(node, InvEntry):
                val = self._inverse(node.matrix)[:, node.i, node.j].copy()
            else:  # pragma: no cover - exhaustive
                raise TypeError(node.kind)
            val.setflags(write=False)
            cache[node] = val

    @staticmethod
    def _pow(node: Pow, b: np.ndarray, e: np.ndarray) -> np.ndarray:
        if isinstance(node.exp, Const):
            ev = node.exp.value
            if float(ev).is_integer():
                if ev < 0 and np.any(b == 0.0):
                    raise DomainError("division by zero in negative power")
                return np.power(b, ev)
            if np.any(b < 0.0) or (ev < 0 and np.any(b == 0.0)):
                raise DomainError("non-integer power of a non-positive base")
            return np.power(b, ev)
        if np.any(b <= 0.0):
            raise DomainError("variable exponent requires a positive base")
        return np.exp(e * np.log(b))

    @staticmethod
    def _func(name: str, a: np.ndarray) -> np.ndarray:
        if name == "sqrt":
            if np.any(a < 0.0):
                raise DomainError("sqrt of a negative value")
            return np.sqrt(a)
        if name == "log":
            if np.any(a <= 0.0):
                raise DomainError("log of a non-positive value")
            return np.log(a)
        if name == "exp":
            with np.errstate(over="raise"):
                try:
                    return np.exp(a)
                except FloatingPointError:
                    raise DomainError("exp overflow") from None
        if name == "sin":
            return np.sin(a)
        return np.cos(a)

    def _inverse(self, m: InverseMatrix) -> np.ndarray:
        hit = self._inv.get(id(m))
        if hit is not None:
            return hit
        mats = np.empty((self.size, m.size, m.size))
        for i, row in enumerate(m.entries):
            for j, e in enumerate(row):
                mats[:, i, j] = self.evaluate(e)
        if not np.all(np.isfinite(mats)):
            raise SingularMatrixError("matrix has non-finite entries")
        cond = np.linalg.cond(mats)
        bad = ~np.isfinite(cond) | (cond > self.max_condition)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise SingularMatrixError(
                f"matrix condition number {cond[k]:.3g} exceeds {self.max_condition:.3g}"
            )
        inv = np.linalg.inv(mats)
        inv.setflags(write=False)
        self._inv[id(m)] = inv
        return inv


def evaluate(e: Expr, x, y) -> float:
    """Scalar value of ``e`` at a single point."""
    return float(Evaluator(np.atleast_2d(x), np.atleast_2d(y)).evaluate(e)[0])
