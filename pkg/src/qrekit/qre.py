"""QRE expression trees.

Each node carries its domain regex ``regex``, its parameter list ``params``
(name -> cost type, insertion ordered) and its cost type ``ctype``.  The
builders below check the side conditions of each combinator and raise
:class:`QreError` when one fails, so every tree that exists is well formed.

A stream composition whose second stage is not total has a domain that is
not regular in the item alphabet in general; such nodes have
``regex = None`` ("opaque") and may only appear as the first stage of
another composition or at the root.
"""
from __future__ import annotations

from typing import Any, Callable, Sequence

from .costs import BOTTOM, Operation, REGISTRY, apply, types_compatible
from .symbolic import (
    Atom,
    Concat,
    Epsilon,
    Predicate,
    RegexError,
    Schema,
    Star,
    compile_predicate,
    is_universal,
    language_equal,
)
from .symbolic.automata import check_disjoint_detail

__all__ = [
    "QreError",
    "Expr",
    "FieldRef",
    "Lit",
    "ParamRef",
    "Call",
    "PyFn",
    "QreExpr",
    "Basic",
    "Eps",
    "CostOp",
    "Subst",
    "Else",
    "Split",
    "Iter",
    "Compose",
    "make_basic",
    "make_eps",
    "make_cost_op",
    "make_subst",
    "make_else",
    "make_split",
    "make_iter",
    "make_stream_compose",
    "iter_op",
    "lift",
    "value_schema",
    "NOTCONST",
]


class QreError(ValueError):
    """A combinator's side condition does not hold."""

    def __init__(self, message: str, invariant: str = "", witness=None):
        super().__init__(message)
        self.invariant = invariant
        self.witness = witness


class _NotConst:
    def __repr__(self):
        return "NOTCONST"


NOTCONST = _NotConst()


def _op(op) -> Operation:
    return REGISTRY[op] if isinstance(op, str) else op


def _value_type(x) -> str:
    if isinstance(x, bool):
        return "boolean"
    if isinstance(x, int):
        return "integer"
    if isinstance(x, float):
        return "real"
    return "any"


# ---------------------------------------------------------------------------
# cost functions of basic QREs


class Expr:
    """Cost-function syntax: fields of the current item, constants, parameters and operations."""

    __slots__ = ()

    def params(self) -> dict:
        return {}

    def uses_item(self) -> bool:
        return False


class FieldRef(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name

    def uses_item(self):
        return True

    def type_in(self, schema: Schema) -> str:
        kind = schema.field(self.name).kind
        return kind if kind in ("real", "integer", "boolean") else "any"

    def compile(self, schema):
        get = schema.getter(self.name)
        return lambda item, env: get(item)

    def __repr__(self):
        return self.name


class Lit(Expr):
    __slots__ = ("value", "ctype")

    def __init__(self, value, ctype: str | None = None):
        self.value = value
        self.ctype = ctype or _value_type(value)

    def type_in(self, schema):
        return self.ctype

    def compile(self, schema):
        v = self.value
        return lambda item, env: v

    def __repr__(self):
        return repr(self.value)


class ParamRef(Expr):
    __slots__ = ("name", "ctype")

    def __init__(self, name: str, ctype: str = "real"):
        self.name = name
        self.ctype = ctype

    def params(self):
        return {self.name: self.ctype}

    def type_in(self, schema):
        return self.ctype

    def compile(self, schema):
        name = self.name
        return lambda item, env: env[name]

    def __repr__(self):
        return self.name


class Call(Expr):
    __slots__ = ("op", "args")

    def __init__(self, op, *args):
        self.op = _op(op)
        self.args = tuple(a if isinstance(a, Expr) else Lit(a) for a in args)

    def params(self):
        out = {}
        for a in self.args:
            for k, t in a.params().items():
                if k in out and not types_compatible(out[k], t):
                    raise QreError(f"parameter {k} used at types {out[k]} and {t}", "parameter-type")
                out[k] = t
        return out

    def uses_item(self):
        return any(a.uses_item() for a in self.args)

    def type_in(self, schema):
        try:
            return self.op.result_type([a.type_in(schema) for a in self.args])
        except TypeError as exc:
            raise QreError(str(exc), "operation-type") from None

    def compile(self, schema):
        op = self.op
        subs = [a.compile(schema) for a in self.args]
        if len(subs) == 1:
            (s0,) = subs
            return lambda item, env: apply(op, (s0(item, env),))
        if len(subs) == 2:
            s0, s1 = subs
            return lambda item, env: apply(op, (s0(item, env), s1(item, env)))
        return lambda item, env: apply(op, [s(item, env) for s in subs])

    def __repr__(self):
        return f"{self.op.name}({', '.join(map(repr, self.args))})"


class PyFn(Expr):
    """Opaque Python function of the item; may not mention parameters."""

    __slots__ = ("func", "ctype")

    def __init__(self, func: Callable[[Any], Any], ctype: str = "real"):
        self.func = func
        self.ctype = ctype

    def uses_item(self):
        return True

    def type_in(self, schema):
        return self.ctype

    def compile(self, schema):
        f = self.func
        return lambda item, env: f(item)

    def __repr__(self):
        return getattr(self.func, "__name__", "fn")


def _as_expr(fn, ctype=None) -> Expr:
    if isinstance(fn, Expr):
        return fn
    if callable(fn):
        return PyFn(fn, ctype or "real")
    return Lit(fn, ctype)


# ---------------------------------------------------------------------------
# expression nodes


class QreExpr:
    """Base class of QRE nodes.  Instances are immutable."""

    kind = "?"

    def _meta(self, schema, regex, params, ctype, children, const=NOTCONST):
        self.schema = schema
        self.regex = regex
        self.params = dict(params)
        self.ctype = ctype
        self.children = tuple(children)
        self.size = 1 + sum(c.size for c in self.children)
        self.depth = 1 + max((c.depth for c in self.children), default=0)
        self.const = const

    @property
    def opaque(self) -> bool:
        return self.regex is None


class Basic(QreExpr):
    kind = "basic"

    def __init__(self, predicate: Predicate, fn: Expr, schema: Schema):
        self.predicate = predicate
        self.fn = fn
        self.test = compile_predicate(predicate, schema)
        self.eval_fn = fn.compile(schema)
        const = fn.value if isinstance(fn, Lit) else NOTCONST
        self._meta(schema, Atom(predicate, schema), fn.params(), fn.type_in(schema), (), const)

    def __repr__(self):
        return f"basic({self.predicate}, {self.fn!r})"


class Eps(QreExpr):
    """Defined only on the empty stream, where it yields ``term``."""

    kind = "eps"

    def __init__(self, term: Expr, schema: Schema):
        if term.uses_item():
            raise QreError("an empty-stream QRE cannot read item fields", "eps-term")
        self.term = term
        self.eval_fn = term.compile(schema)
        const = term.value if isinstance(term, Lit) else NOTCONST
        self._meta(schema, Epsilon(schema), term.params(), term.type_in(schema), (), const)

    def __repr__(self):
        return f"eps({self.term!r})"


class CostOp(QreExpr):
    kind = "op"

    def __init__(self, op: Operation, children: Sequence[QreExpr]):
        self.op = op
        consts = [c.const for c in children]
        const = NOTCONST
        if all(c is not NOTCONST for c in consts):
            const = op.func(*consts)
        ctype = op.result_type([c.ctype for c in children])
        params = {}
        for c in children:
            params.update(c.params)
        self._meta(children[0].schema, children[0].regex, params, ctype, children, const)

    def __repr__(self):
        return f"op({self.op.name}, {', '.join(map(repr, self.children))})"


class Subst(QreExpr):
    kind = "subst"

    def __init__(self, f: QreExpr, x: str, g: QreExpr):
        self.f, self.x, self.g = f, x, g
        params = {k: t for k, t in f.params.items() if k != x}
        params.update(g.params)
        self._meta(f.schema, f.regex, params, f.ctype, (f, g), f.const)

    def __repr__(self):
        return f"subst({self.f!r}, {self.x}, {self.g!r})"


class Else(QreExpr):
    kind = "else"

    def __init__(self, f: QreExpr, g: QreExpr, regex):
        self.f, self.g = f, g
        const = f.const if (f.const is not NOTCONST and f.const == g.const) else NOTCONST
        params = dict(f.params)
        params.update(g.params)
        ctype = f.ctype if f.ctype == g.ctype or g.ctype == "any" else g.ctype
        self._meta(f.schema, regex, params, ctype, (f, g), const)

    def __repr__(self):
        return f"else({self.f!r}, {self.g!r})"


class Split(QreExpr):
    kind = "split"

    def __init__(self, op: Operation, f: QreExpr, g: QreExpr, regex):
        self.op, self.f, self.g = op, f, g
        if op.name == "left":
            const = f.const
        elif op.name == "right":
            const = g.const
        elif f.const is not NOTCONST and g.const is not NOTCONST:
            const = op.func(f.const, g.const)
        else:
            const = NOTCONST
        params = dict(f.params)
        params.update(g.params)
        self._meta(f.schema, regex, params, op.result_type([f.ctype, g.ctype]), (f, g), const)

    def __repr__(self):
        return f"split({self.op.name}, {self.f!r}, {self.g!r})"


class Iter(QreExpr):
    """Fold over the unique block factorisation.

    The seed is the value of parameter ``p`` or, when ``init`` is given, the
    constant ``init`` (then ``p`` is bound internally and not exposed).
    """

    kind = "iter"

    def __init__(self, p: str, f: QreExpr, regex, init=BOTTOM):
        self.p, self.f, self.init = p, f, init
        closed = init is not BOTTOM
        params = {} if closed else {p: f.ctype}
        const = NOTCONST
        if closed and f.const is not NOTCONST and f.const == init and p not in f.params:
            const = init
        self._meta(f.schema, regex, params, f.ctype, (f,), const)

    def __repr__(self):
        if self.init is not BOTTOM:
            return f"iter({self.p}, {self.f!r}, init={self.init!r})"
        return f"iter({self.p}, {self.f!r})"


class Compose(QreExpr):
    kind = "compose"

    def __init__(self, f: QreExpr, g: QreExpr, regex):
        self.f, self.g = f, g
        self._meta(f.schema, regex, g.params, g.ctype, (f, g))

    def __repr__(self):
        return f"compose({self.f!r}, {self.g!r})"


# ---------------------------------------------------------------------------
# checked builders


def _need_domain(*fs: QreExpr, where: str) -> None:
    for f in fs:
        if f.opaque:
            raise QreError(
                f"{where}: operand {f!r} has an opaque domain (a composition whose second stage is not total)",
                "opaque-domain",
            )


def _same_schema(*fs: QreExpr) -> Schema:
    s = fs[0].schema
    for f in fs[1:]:
        if f.schema != s:
            raise QreError("operands range over different item schemas", "schema")
    return s


def _merge_params(fs: Sequence[QreExpr], allow_shared: bool, where: str) -> None:
    seen: dict = {}
    for f in fs:
        for k, t in f.params.items():
            if k in seen:
                if not allow_shared:
                    raise QreError(f"{where}: parameter {k!r} occurs in more than one operand", "disjoint-parameters")
                if not types_compatible(seen[k], t):
                    raise QreError(f"{where}: parameter {k!r} has types {seen[k]} and {t}", "parameter-type")
            seen[k] = t


def make_basic(predicate: Predicate, fn, schema: Schema, ctype: str | None = None) -> Basic:
    """Defined on single items satisfying ``predicate``; value ``fn(item)``.

    ``fn`` is an :class:`Expr`, a Python callable of the item, or a constant.
    """
    return Basic(predicate, _as_expr(fn, ctype), schema)


def make_eps(term, schema: Schema, ctype: str | None = None) -> Eps:
    return Eps(_as_expr(term, ctype), schema)


def make_cost_op(op, children: Sequence[QreExpr]) -> CostOp:
    op = _op(op)
    children = list(children)
    if not children:
        raise QreError("operation needs at least one operand", "arity")
    _same_schema(*children)
    _need_domain(*children, where=f"op({op.name})")
    for c in children[1:]:
        if not language_equal(children[0].regex, c.regex):
            raise QreError(f"op({op.name}): operand domains differ", "equal-domains")
    _merge_params(children, False, f"op({op.name})")
    try:
        op.result_type([c.ctype for c in children])
    except TypeError as exc:
        raise QreError(str(exc), "operation-type") from None
    return CostOp(op, children)


def make_subst(f: QreExpr, x: str, g: QreExpr) -> Subst:
    _same_schema(f, g)
    _need_domain(f, g, where="subst")
    if x not in f.params:
        raise QreError(f"subst: {x!r} is not a parameter of {f!r}", "parameter-present")
    shared = set(f.params) & set(g.params)
    if shared - {x}:
        raise QreError(f"subst: parameters {sorted(shared - {x})} shared besides {x!r}", "single-shared-parameter")
    if not types_compatible(f.params[x], g.ctype):
        raise QreError(f"subst: {x!r} has type {f.params[x]} but g produces {g.ctype}", "parameter-type")
    if not language_equal(f.regex, g.regex):
        raise QreError("subst: operand domains differ", "equal-domains")
    return Subst(f, x, g)


def make_else(f: QreExpr, g: QreExpr) -> Else:
    _same_schema(f, g)
    _need_domain(f, g, where="else")
    if not (f.ctype == g.ctype or "any" in (f.ctype, g.ctype)):
        raise QreError(f"else: cost types {f.ctype} and {g.ctype} differ", "equal-cost-types")
    _merge_params([f, g], True, "else")
    res = check_disjoint_detail(f.regex, g.regex)
    if not res.ok:
        raise QreError("else: operand domains overlap", "disjoint-domains", res.witness)
    from .symbolic import Union

    return Else(f, g, Union(f.regex, g.regex, check=False))


def make_split(op, f: QreExpr, g: QreExpr) -> Split:
    op = _op(op)
    _same_schema(f, g)
    _need_domain(f, g, where=f"split({op.name})")
    _merge_params([f, g], False, f"split({op.name})")
    try:
        op.result_type([f.ctype, g.ctype])
    except TypeError as exc:
        raise QreError(str(exc), "operation-type") from None
    try:
        regex = Concat(f.regex, g.regex)
    except RegexError as exc:
        raise QreError(f"split({op.name}): {exc}", "unambiguous-concatenation", exc.witness) from None
    return Split(op, f, g, regex)


def make_iter(p: str, f: QreExpr, init=BOTTOM) -> Iter:
    _need_domain(f, where="iter")
    extra = set(f.params) - {p}
    if extra:
        raise QreError(f"iter: operand mentions parameters {sorted(extra)} besides {p!r}", "iter-parameters")
    if p in f.params and not types_compatible(f.params[p], f.ctype):
        raise QreError(f"iter: {p!r} has type {f.params[p]} but the block value is {f.ctype}", "parameter-type")
    try:
        regex = Star(f.regex)
    except RegexError as exc:
        raise QreError(f"iter: {exc}", "unambiguous-iteration", exc.witness) from None
    return Iter(p, f, regex, init)


def value_schema(ctype: str, name: str = "v") -> Schema:
    """Scalar item schema for a stream of values of cost type ``ctype``."""
    kind = ctype if ctype in ("real", "integer", "boolean") else "any"
    return Schema.single(name, kind)


def make_stream_compose(f: QreExpr, g: QreExpr) -> Compose:
    if f.params:
        raise QreError(f"compose: first stage has parameters {sorted(f.params)}", "closed-first-stage")
    gs = g.schema
    if not gs.scalar:
        raise QreError("compose: second stage must read a scalar stream", "schema")
    kind = gs.fields[0].kind
    ok = (
        kind == "any"
        or kind == f.ctype
        or (kind == "real" and f.ctype == "integer")
    )
    if not ok:
        raise QreError(f"compose: second stage reads {kind} items but the first emits {f.ctype}", "schema")
    regex = None
    if not g.opaque and is_universal(g.regex):
        from .symbolic import anything

        regex = anything(f.schema)
    return Compose(f, g, regex)


# ---------------------------------------------------------------------------
# derived forms


def iter_op(op, f: QreExpr, seed=BOTTOM, p: str = "_acc") -> Iter:
    """Left fold of ``op`` over the blocks of ``f`` (``iter-op`` of the examples).

    With ``seed`` the result is closed; otherwise the seed is parameter ``p``.
    """
    op = _op(op)
    acc = make_eps(ParamRef(p, f.ctype), f.schema)
    return make_iter(p, make_split(op, acc, f), seed)


def lift(regex, value, ctype: str | None = None) -> QreExpr:
    """Constant QRE with domain ``regex``."""
    from .symbolic import Union as U

    if regex is None:
        raise QreError("lift: the domain is not a regular expression (opaque composition)", "opaque-domain")
    schema = regex.schema
    term = Lit(value, ctype)

    def go(r):
        if isinstance(r, Epsilon):
            return Eps(term, schema)
        if isinstance(r, Atom):
            return Basic(r.predicate, term, schema)
        if isinstance(r, U):
            return Else(go(r.left), go(r.right), r)
        if isinstance(r, Concat):
            return Split(REGISTRY["left"], go(r.left), go(r.right), r)
        if isinstance(r, Star):
            return Iter("_c", go(r.inner), r, term.value)
        raise TypeError(r)

    return go(regex)
