"""Symbolic scalar expressions, numeric evaluation and tensor-field helpers."""

from .evaluate import DomainError, Evaluator, SingularMatrixError, evaluate
from .expr import (
    ONE,
    ZERO,
    Expr,
    Var,
    X,
    Y,
    add,
    as_expr,
    const,
    cos,
    diff_multi,
    differentiate,
    esum,
    exp,
    log,
    mul,
    power,
    simplify,
    sin,
    sqrt,
    var,
)
from .fdcheck import fd_oracle
from .parser import IndexRange, ParseError, UnknownIdentifier, parse_expr
from .printer import to_string
from .tensor import (
    asarray,
    build,
    eval_with_partials,
    evaluate_tensor,
    gradient,
    inverse,
    is_zero,
    tdiff,
    tmap,
    zeros,
)

__all__ = [name for name in dir() if not name.startswith("_")]
