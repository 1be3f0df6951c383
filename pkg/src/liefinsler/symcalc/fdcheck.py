"""Finite-difference oracle for partial derivatives (test-side reference).

Central differences of order ≤ 3 in any mix of variables, Richardson
extrapolated, with the step chosen adaptively from ``{1e-3, 1e-4, 1e-5}``
by the smallest estimated (truncation + round-off) error.  Higher orders are
obtained by applying the oracle to a symbolic intermediate derivative.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .evaluate import Evaluator
from .expr import Expr, Var

STEPS = (1e-3, 1e-4, 1e-5)


def _as_function(f) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if isinstance(f, Expr):
        return lambda xs, ys: Evaluator(xs, ys).evaluate(f)
    return f


def _stencil(fun, x, y, vars_: Sequence[Var], h: float) -> float:
    """Tensor-product central difference of ∂^k f / ∂v1..∂vk with step h."""
    k = len(vars_)
    signs = list(itertools.product((1.0, -1.0), repeat=k))
    xs = np.repeat(x[None, :], len(signs), axis=0)
    ys = np.repeat(y[None, :], len(signs), axis=0)
    weights = np.empty(len(signs))
    for r, sg in enumerate(signs):
        for s, v in zip(sg, vars_):
            target = xs if v.space == "x" else ys
            target[r, v.index] += s * h
        weights[r] = np.prod(sg)
    vals = np.asarray(fun(xs, ys), dtype=float)
    return float(np.dot(weights, vals) / (2.0 * h) ** k)


def fd_oracle(f, x, y, vars_: Sequence[Var] | Var, order: int | None = None) -> float:
    """Estimate the mixed partial of ``f`` at ``(x, y)``.

    ``vars_`` is a single variable (differentiated ``order`` times) or a
    sequence of at most three variables.  ``f`` is an expression or a
    vectorised callable ``f(xs, ys) -> values``.
    """
    if isinstance(vars_, Var):
        vars_ = [vars_] * (order or 1)
    elif order is not None and order != len(vars_):
        raise ValueError("order disagrees with the variable list")
    vars_ = list(vars_)
    if not 1 <= len(vars_) <= 3:
        raise ValueError("finite-difference order must be between 1 and 3")
    fun = _as_function(f)
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    k = len(vars_)
    scale = abs(float(np.asarray(fun(x[None, :], y[None, :]))[0])) + 1.0
    best, best_err = None, np.inf
    for h in STEPS:
        d1 = _stencil(fun, x, y, vars_, h)
        d2 = _stencil(fun, x, y, vars_, h / 2)
        rich = (4.0 * d2 - d1) / 3.0
        err = abs(d2 - d1) / 3.0 + np.finfo(float).eps * scale / (h / 2) ** k
        if err < best_err:
            best, best_err = rich, err
    return float(best)
