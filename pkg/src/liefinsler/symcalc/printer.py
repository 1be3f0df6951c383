"""Render expressions back into the textual grammar accepted by the parser.

The output is value-preserving under ``parse``: negative constants are
parenthesised and every compound base or exponent of ``^`` is bracketed, so
precedence and right-associativity of ``^`` never change the meaning.
"""

from __future__ import annotations

from .expr import Add, Const, Expr, Func, InvEntry, Mul, Pow, Var, postorder


def _number(v: float) -> str:
    text = repr(float(v))
    if text.endswith(".0"):
        text = text[:-2]
    return f"({text})" if v < 0 else text


def _atomic(e: Expr, text: str) -> bool:
    if isinstance(e, (Var, Func)):
        return True
    if isinstance(e, Const) and e.value >= 0:
        return True
    return text.startswith("(") and text.endswith(")") and _balanced_outer(text)


def _balanced_outer(text: str) -> bool:
    depth = 0
    for k, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and k < len(text) - 1:
            return False
    return True


def to_string(e: Expr) -> str:
    """Grammar text of ``e``; raises ``ValueError`` for inverse-matrix nodes."""
    out: dict[Expr, str] = {}
    for node in postorder([e]):
        if isinstance(node, InvEntry):
            raise ValueError("inverse-matrix entries have no textual form")
        if isinstance(node, Const):
            out[node] = _number(node.value)
        elif isinstance(node, Var):
            out[node] = node.name
        elif isinstance(node, Func):
            out[node] = f"{node.name}({out[node.arg]})"
        elif isinstance(node, Pow):
            b, x = out[node.base], out[node.exp]
            if not _atomic(node.base, b):
                b = f"({b})"
            if not _atomic(node.exp, x):
                x = f"({x})"
            out[node] = f"{b}^{x}"
        elif isinstance(node, Mul):
            parts = []
            for f in node.factors:
                s = out[f]
                parts.append(f"({s})" if isinstance(f, Add) else s)
            out[node] = "*".join(parts)
        elif isinstance(node, Add):
            out[node] = " + ".join(out[t] for t in node.terms)
    return out[e]
