"""Tensor fields as numpy object arrays of expressions.

Components are :class:`~liefinsler.symcalc.expr.Expr` nodes, so every entry
can be differentiated symbolically and evaluated over a batch of points.
The only non-grammar entry type is the matrix-inverse node produced by
:func:`inverse`.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .evaluate import Evaluator, SingularMatrixError
from .expr import ZERO, Const, Expr, InverseMatrix, Var, as_expr, const, differentiate

Tensor = np.ndarray


def zeros(*shape: int) -> Tensor:
    out = np.empty(shape, dtype=object)
    out.fill(ZERO)
    return out


def build(shape: Sequence[int], fn: Callable[..., object]) -> Tensor:
    """Tensor whose entry at index ``idx`` is ``fn(*idx)`` (coerced to Expr)."""
    out = np.empty(tuple(shape), dtype=object)
    for idx in itertools.product(*[range(s) for s in shape]):
        out[idx] = as_expr(fn(*idx))
    return out


def asarray(values) -> Tensor:
    arr = np.array(values, dtype=object, order="C")
    out = np.empty(arr.shape, dtype=object)
    for idx in np.ndindex(arr.shape):
        out[idx] = as_expr(arr[idx])
    return out


def tmap(fn: Callable[[Expr], Expr], t: Tensor) -> Tensor:
    out = np.empty(t.shape, dtype=object)
    for idx in np.ndindex(t.shape):
        out[idx] = as_expr(fn(t[idx]))
    return out


def tdiff(t: Tensor, v: Var) -> Tensor:
    """Entrywise exact partial derivative."""
    return tmap(lambda e: differentiate(e, v), t)


def gradient(t: Tensor, vars_: Sequence[Var]) -> Tensor:
    """Stack of partials: result[..., k] = ∂t/∂vars_[k]."""
    out = np.empty(t.shape + (len(vars_),), dtype=object)
    for k, v in enumerate(vars_):
        out[..., k] = tdiff(t, v)
    return out


def inverse(mat: Tensor) -> Tensor:
    """Pointwise inverse of a square expression matrix.

    Constant matrices are inverted once, exactly as numbers; otherwise the
    entries are inverse-matrix nodes whose derivatives follow the inverse
    rule and whose values come from a batched numeric inversion.
    """
    mat = np.asarray(mat, dtype=object)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("inverse requires a square matrix")
    if all(isinstance(e, Const) for e in mat.flat):
        num = np.array([[e.value for e in row] for row in mat], dtype=float)
        if not np.isfinite(np.linalg.cond(num)) or np.linalg.cond(num) > 1e12:
            raise SingularMatrixError("constant matrix is singular")
        inv = np.linalg.inv(num)
        return build(mat.shape, lambda i, j: const(inv[i, j]))
    im = InverseMatrix(mat.tolist())
    return build(mat.shape, lambda i, j: im.entry(i, j))


def evaluate_tensor(t: Tensor, ev: Evaluator) -> np.ndarray:
    """Values with shape ``(P,) + t.shape``."""
    t = np.asarray(t, dtype=object)
    flat = list(t.reshape(-1))
    vals = ev.evaluate_many(flat)
    if not vals:
        return np.zeros((ev.size,) + t.shape)
    return np.stack(vals, axis=-1).reshape((ev.size,) + t.shape)


def eval_with_partials(entry: Expr, x, y, multi_index: Sequence[Var] = ()) -> float:
    """Value at one point of ``∂^k entry / ∂v1..∂vk`` for ``multi_index = (v1..vk)``."""
    e = entry
    for v in multi_index:
        e = differentiate(e, v)
    return float(Evaluator(np.atleast_2d(x), np.atleast_2d(y)).evaluate(e)[0])


def is_zero(t: Tensor) -> bool:
    """True when every entry is the literal zero node (structural, not numeric)."""
    return all(e is ZERO for e in np.asarray(t, dtype=object).flat)
