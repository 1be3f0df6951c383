"""Hash-consed scalar expression DAG with exact symbolic differentiation.

Nodes are immutable and interned: building the same expression twice returns
the same object, so structurally equal subtrees are shared and derivative
memoization works across the whole program.  Identity (``is``) therefore
coincides with structural equality.

Variables are base coordinates ``x1..xm`` and fiber coordinates ``y1..yn``;
internally they carry 0-based indices (``Var('x', 0)`` is ``x1``).

Besides the grammar nodes (constants, variables, +, *, ^, sqrt/exp/log/sin/cos)
there is one derived node, :class:`InvEntry`, an entry of the pointwise
inverse of a square matrix of expressions.  Its derivative follows
``d(M^-1) = -M^-1 (dM) M^-1``; its value is computed numerically at
evaluation time (see :mod:`liefinsler.symcalc.evaluate`).
"""

from __future__ import annotations

import hashlib
import math
import struct
import threading
from typing import Iterable, Sequence

import numpy as np

FUNCS = ("sqrt", "exp", "log", "sin", "cos")

_TABLE: dict[tuple, "Expr"] = {}
_LOCK = threading.RLock()


def _digest(*parts: object) -> int:
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        if isinstance(p, float):
            h.update(struct.pack("<d", p))
        elif isinstance(p, int):
            h.update(p.to_bytes(16, "little", signed=True))
        else:
            h.update(str(p).encode())
        h.update(b"|")
    return int.from_bytes(h.digest(), "little")


class Expr:
    """Base node.  Use the module-level constructors, never ``__init__``."""

    __slots__ = ("key", "digest", "varmask", "_dcache", "__weakref__")
    kind = "expr"

    key: tuple
    digest: int
    varmask: int

    def __hash__(self) -> int:
        return self.digest

    def __eq__(self, other: object) -> bool:
        return self is other

    # -- arithmetic sugar ---------------------------------------------------
    # Arrays are left to numpy (returning NotImplemented) so that
    # ``expr * tensor`` broadcasts entrywise.
    def __add__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return add(self, as_expr(other))

    def __radd__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return add(as_expr(other), self)

    def __sub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return div(as_expr(other), self)

    def __pow__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return power(self, as_expr(other))

    def __rpow__(self, other):
        if isinstance(other, np.ndarray):
            return NotImplemented
        return power(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __repr__(self) -> str:
        from .printer import to_string

        try:
            return f"Expr({to_string(self)!r})"
        except ValueError:
            return f"Expr(<{self.kind}>)"

    # -- calculus -----------------------------------------------------------
    def diff(self, var: "Var") -> "Expr":
        return differentiate(self, var)

    @property
    def children(self) -> tuple["Expr", ...]:
        return ()

    @property
    def is_zero(self) -> bool:
        return self is ZERO

    def depends_on(self, var: "Var") -> bool:
        return bool(self.varmask & var.bit)


def _intern(cls, key: tuple, digest: int, varmask: int, **attrs) -> Expr:
    # Keys of composite nodes hold ``id()`` of their children: the intern
    # table keeps every node alive, so ids are never recycled.
    node = _TABLE.get(key)
    if node is not None:
        return node
    with _LOCK:
        node = _TABLE.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node.key = key
        node.digest = digest
        node.varmask = varmask
        node._dcache = {}
        for name, value in attrs.items():
            object.__setattr__(node, name, value)
        _TABLE[key] = node
        return node


class Const(Expr):
    __slots__ = ("value",)
    kind = "const"
    value: float


class Var(Expr):
    __slots__ = ("space", "index", "bit")
    kind = "var"
    space: str
    index: int
    bit: int

    @property
    def name(self) -> str:
        return f"{self.space}{self.index + 1}"


class Add(Expr):
    __slots__ = ("terms",)
    kind = "add"
    terms: tuple[Expr, ...]

    @property
    def children(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)
    kind = "mul"
    factors: tuple[Expr, ...]

    @property
    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = "pow"
    base: Expr
    exp: Expr

    @property
    def children(self):
        return (self.base, self.exp)


class Func(Expr):
    __slots__ = ("name", "arg")
    kind = "func"
    name: str
    arg: Expr

    @property
    def children(self):
        return (self.arg,)


class InverseMatrix:
    """A square matrix of expressions whose pointwise inverse is requested.

    Interned like expression nodes; ``entry(i, j)`` yields :class:`InvEntry`
    nodes sharing this object so an evaluator inverts the matrix once per
    point batch.
    """

    __slots__ = ("entries", "size", "digest", "varmask")
    _table: dict[tuple, "InverseMatrix"] = {}

    def __new__(cls, entries: Sequence[Sequence[Expr]]):
        rows = tuple(tuple(as_expr(e) for e in row) for row in entries)
        size = len(rows)
        if any(len(r) != size for r in rows):
            raise ValueError("inverse requires a square matrix")
        key = tuple(id(e) for r in rows for e in r)
        with _LOCK:
            obj = cls._table.get(key)
            if obj is None:
                obj = object.__new__(cls)
                obj.entries = rows
                obj.size = size
                obj.digest = _digest("inv", *[e.digest for r in rows for e in r])
                mask = 0
                for r in rows:
                    for e in r:
                        mask |= e.varmask
                obj.varmask = mask
                cls._table[key] = obj
        return obj

    def entry(self, i: int, j: int) -> "InvEntry":
        return _intern(
            InvEntry,
            ("inv", id(self), i, j),
            _digest("inventry", self.digest, i, j),
            self.varmask,
            matrix=self,
            i=i,
            j=j,
        )


class InvEntry(Expr):
    __slots__ = ("matrix", "i", "j")
    kind = "inv"
    matrix: InverseMatrix
    i: int
    j: int

    @property
    def children(self):
        return tuple(e for row in self.matrix.entries for e in row)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def const(value: float) -> Const:
    v = float(value)
    if v == 0.0:
        v = 0.0  # fold -0.0
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite constant {value!r}")
    return _intern(Const, ("c", v), _digest("c", v), 0, value=v)


ZERO = const(0.0)
ONE = const(1.0)
MINUS_ONE = const(-1.0)
HALF = const(0.5)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return const(value)
    try:  # numpy scalars
        return const(float(value))
    except (TypeError, ValueError):
        raise TypeError(f"cannot convert {type(value).__name__} to Expr") from None


def var(space: str, index: int) -> Var:
    if space not in ("x", "y"):
        raise ValueError("variable space must be 'x' or 'y'")
    if index < 0 or index >= 31:
        raise ValueError("variable index out of supported range")
    bit = 1 << (index + (0 if space == "x" else 32))
    return _intern(Var, ("v", space, index), _digest("v", space, index), bit,
                   space=space, index=index, bit=bit)


def X(i: int) -> Var:
    """Base coordinate x^{i+1} (0-based index)."""
    return var("x", i)


def Y(a: int) -> Var:
    """Fiber coordinate y^{a+1} (0-based index)."""
    return var("y", a)


def _split_coeff(e: Expr) -> tuple[float, Expr]:
    if isinstance(e, Mul) and isinstance(e.factors[0], Const):
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else _raw_mul(rest)
    if isinstance(e, Const):
        return e.value, ONE
    return 1.0, e


def _raw_mul(factors: tuple[Expr, ...]) -> Expr:
    mask = 0
    for f in factors:
        mask |= f.varmask
    return _intern(Mul, ("mul",) + tuple(id(f) for f in factors),
                   _digest("mul", *[f.digest for f in factors]), mask, factors=factors)


def _raw_add(terms: tuple[Expr, ...]) -> Expr:
    mask = 0
    for t in terms:
        mask |= t.varmask
    return _intern(Add, ("add",) + tuple(id(t) for t in terms),
                   _digest("add", *[t.digest for t in terms]), mask, terms=terms)


def add(*args: Expr) -> Expr:
    """Sum with constant folding, flattening and like-term collection."""
    constant = 0.0
    coeffs: dict[Expr, float] = {}
    order: list[Expr] = []
    stack = list(args)
    stack.reverse()
    while stack:
        a = stack.pop()
        if isinstance(a, Add):
            stack.extend(reversed(a.terms))
            continue
        if isinstance(a, Const):
            constant += a.value
            continue
        c, rest = _split_coeff(a)
        if rest in coeffs:
            coeffs[rest] += c
        else:
            coeffs[rest] = c
            order.append(rest)
    terms = []
    for rest in order:
        c = coeffs[rest]
        if c == 0.0:
            continue
        terms.append(rest if c == 1.0 else mul(const(c), rest))
    terms.sort(key=lambda t: t.digest)
    if constant != 0.0:
        terms.insert(0, const(constant))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return _raw_add(tuple(terms))


def _base_exp(f: Expr) -> tuple[Expr, Expr]:
    if isinstance(f, Pow):
        return f.base, f.exp
    return f, ONE


def mul(*args: Expr) -> Expr:
    """Product with constant folding, flattening and power collection."""
    constant = 1.0
    exps: dict[Expr, Expr] = {}
    order: list[Expr] = []
    stack = list(args)
    stack.reverse()
    while stack:
        a = stack.pop()
        if isinstance(a, Mul):
            stack.extend(reversed(a.factors))
            continue
        if isinstance(a, Const):
            constant *= a.value
            continue
        b, e = _base_exp(a)
        if b in exps:
            exps[b] = add(exps[b], e)
        else:
            exps[b] = e
            order.append(b)
    if constant == 0.0:
        return ZERO
    factors = []
    for b in order:
        f = power(b, exps[b])
        if isinstance(f, Const):
            constant *= f.value
            continue
        if isinstance(f, Mul):  # power distributed a constant out
            for g in f.factors:
                if isinstance(g, Const):
                    constant *= g.value
                else:
                    factors.append(g)
            continue
        factors.append(f)
    if constant == 0.0:
        return ZERO
    factors.sort(key=lambda f: f.digest)
    if constant != 1.0 or not factors:
        if not factors:
            return const(constant)
        factors.insert(0, const(constant))
    if len(factors) == 1:
        return factors[0]
    return _raw_mul(tuple(factors))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const):
        if b.value == 0.0:
            raise ZeroDivisionError("division by constant zero")
        return mul(a, const(1.0 / b.value))
    return mul(a, power(b, MINUS_ONE))


def _is_int(v: float) -> bool:
    return float(v).is_integer()


def power(base: Expr, exp: Expr) -> Expr:
    if isinstance(exp, Const):
        if exp.value == 0.0:
            return ONE
        if exp.value == 1.0:
            return base
        if isinstance(base, Const):
            b, e = base.value, exp.value
            if b == 0.0 and e < 0:
                raise ZeroDivisionError("constant zero raised to a negative power")
            if b < 0 and not _is_int(e):
                raise ValueError("negative constant raised to a non-integer power")
            return const(b ** e)
        if isinstance(base, Pow) and isinstance(base.exp, Const) and _is_int(exp.value):
            return power(base.base, const(base.exp.value * exp.value))
    elif isinstance(base, Const) and base.value == 1.0:
        return ONE
    if isinstance(base, Const) and base.value == 1.0:
        return ONE
    return _intern(Pow, ("pow", id(base), id(exp)), _digest("pow", base.digest, exp.digest),
                   base.varmask | exp.varmask, base=base, exp=exp)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCS:
        raise ValueError(f"unknown function {name!r}")
    if isinstance(arg, Const):
        v = arg.value
        if name == "sqrt":
            if v < 0:
                raise ValueError("sqrt of a negative constant")
            return const(math.sqrt(v))
        if name == "log":
            if v <= 0:
                raise ValueError("log of a non-positive constant")
            return const(math.log(v))
        return const(getattr(math, name)(v))
    return _intern(Func, ("f", name, id(arg)), _digest("f", name, arg.digest), arg.varmask,
                   name=name, arg=arg)


def sqrt(e) -> Expr:
    return func("sqrt", as_expr(e))


def exp(e) -> Expr:
    return func("exp", as_expr(e))


def log(e) -> Expr:
    return func("log", as_expr(e))


def sin(e) -> Expr:
    return func("sin", as_expr(e))


def cos(e) -> Expr:
    return func("cos", as_expr(e))


def esum(items: Iterable) -> Expr:
    """Sum of an iterable of expressions/numbers as a single n-ary node."""
    return add(*[as_expr(i) for i in items])


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the simplifying constructors.

    Construction already simplifies, so this is idempotent on trees built by
    this module; it matters for trees assembled from raw nodes.
    """
    memo: dict[Expr, Expr] = {}
    for node in postorder([e]):
        if isinstance(node, (Const, Var, InvEntry)):
            memo[node] = node
        elif isinstance(node, Add):
            memo[node] = add(*[memo[t] for t in node.terms])
        elif isinstance(node, Mul):
            memo[node] = mul(*[memo[f] for f in node.factors])
        elif isinstance(node, Pow):
            memo[node] = power(memo[node.base], memo[node.exp])
        elif isinstance(node, Func):
            memo[node] = func(node.name, memo[node.arg])
    return memo[e]


def postorder(roots: Iterable[Expr]) -> list[Expr]:
    """Children-before-parents order of every node reachable from ``roots``.

    Iterative, so arbitrarily deep derivative trees do not hit the recursion
    limit.  Inverse-matrix entries list all matrix entries as children.
    """
    seen: set[int] = set()
    out: list[Expr] = []
    for root in roots:
        if id(root) in seen:
            continue
        stack: list[tuple[Expr, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for ch in reversed(node.children):
                if id(ch) not in seen:
                    stack.append((ch, False))
    return out


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------


def _local_derivative(node: Expr, v: Var, d: dict[Expr, Expr]) -> Expr:
    """Derivative of ``node`` given derivatives ``d`` of its children."""
    if isinstance(node, Var):
        return ONE if node is v else ZERO
    if isinstance(node, Add):
        return add(*[d[t] for t in node.terms])
    if isinstance(node, Mul):
        fs = node.factors
        parts = []
        for k, f in enumerate(fs):
            df = d[f]
            if df is ZERO:
                continue
            parts.append(mul(*fs[:k], df, *fs[k + 1:]))
        return add(*parts)
    if isinstance(node, Pow):
        b, e = node.base, node.exp
        db, de = d[b], d[e]
        if de is ZERO:
            if db is ZERO:
                return ZERO
            return mul(e, power(b, add(e, MINUS_ONE)), db)
        # general case b^e * (e' log b + e b'/b)
        inner = mul(de, func("log", b))
        if db is not ZERO:
            inner = add(inner, mul(e, db, power(b, MINUS_ONE)))
        return mul(node, inner)
    if isinstance(node, Func):
        u = node.arg
        du = d[u]
        if du is ZERO:
            return ZERO
        name = node.name
        if name == "sqrt":
            return mul(HALF, du, power(node, MINUS_ONE))
        if name == "exp":
            return mul(node, du)
        if name == "log":
            return mul(du, power(u, MINUS_ONE))
        if name == "sin":
            return mul(func("cos", u), du)
        if name == "cos":
            return mul(MINUS_ONE, func("sin", u), du)
    if isinstance(node, InvEntry):
        m = node.matrix
        terms = []
        for k in range(m.size):
            for l in range(m.size):
                dm = d[m.entries[k][l]]
                if dm is ZERO:
                    continue
                terms.append(mul(MINUS_ONE, m.entry(node.i, k), dm, m.entry(l, node.j)))
        return add(*terms)
    raise TypeError(f"cannot differentiate node {node.kind}")


def differentiate(e: Expr, v: Var) -> Expr:
    """Exact partial derivative ``∂e/∂v``; memoized per (node, variable)."""
    if not isinstance(v, Var):
        raise TypeError("differentiate expects a Var")
    if not (e.varmask & v.bit):
        return ZERO
    cached = e._dcache.get(v)
    if cached is not None:
        return cached
    d: dict[Expr, Expr] = {}
    for node in postorder([e]):
        if not (node.varmask & v.bit):
            d[node] = ZERO
            continue
        hit = node._dcache.get(v)
        if hit is None:
            hit = _local_derivative(node, v, d)
            node._dcache[v] = hit
        d[node] = hit
    return d[e]


def diff_multi(e: Expr, vars_: Sequence[Var]) -> Expr:
    for v in vars_:
        e = differentiate(e, v)
    return e


def free_vars(e: Expr) -> list[Var]:
    out = []
    for space, offset in (("x", 0), ("y", 32)):
        for i in range(31):
            if e.varmask & (1 << (i + offset)):
                out.append(var(space, i))
    return out


def interned_count() -> int:
    return len(_TABLE)
