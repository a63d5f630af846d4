"""Text syntax for predicates, cost lambdas and QRE expressions.

Parsing happens in two passes: text to a small syntax tree, then the tree is
built against an item schema.  The split lets callers look at the constants
an expression mentions (for instance to declare enum labels) before they
commit to a schema.

Grammar::

    qre    := basic(pred, lam) | eps(lam) | op(NAME, qre, ...)
            | subst(qre, IDENT, qre) | else(qre, qre) | split(NAME, qre, qre)
            | iter(IDENT, qre [, const]) | iter(NAME, IDENT, qre [, const])
            | compose(qre, qre)
    pred   := conj ('|' conj)*
    conj   := unary ('&' unary)*
    unary  := '!' unary | '(' pred ')' | true | false | IDENT CMP const
    CMP    := < | <= | = | == | != | >= | >
    lam    := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | const | IDENT | NAME '(' lam, ... ')' | '(' lam ')'
    const  := number | 'quoted' | "quoted" | true | false

``NAME`` is an operation name (letters, digits, ``_`` and ``-``) with an
optional bracketed argument list such as ``inrange[1,3]``.  ``#`` starts a
comment that runs to the end of the line.

``iter(p, f)`` is the plain iteration when ``f`` mentions ``p``; when it does
not, it is read as the running ``add`` fold over the blocks of ``f`` seeded by
``p``.  ``iter(NAME, p, f)`` is the same fold with operation ``NAME``.  A
trailing constant seeds the iteration and closes ``p``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .costs import BOTTOM, REGISTRY, Operation, OperationRegistry, inc, inrange, scale_by
from .qre import (
    Call,
    FieldRef,
    Lit,
    ParamRef,
    QreError,
    QreExpr,
    iter_op,
    make_basic,
    make_cost_op,
    make_else,
    make_eps,
    make_iter,
    make_split,
    make_stream_compose,
    make_subst,
)
from .symbolic import FALSE, TRUE, Cmp, Not, Predicate, Schema

__all__ = [
    "ParseError",
    "parse_predicate",
    "parse_lambda",
    "parse_qre",
    "parse_qre_syntax",
    "build_qre",
    "string_constants",
    "resolve_operation",
]


class ParseError(ValueError):
    def __init__(self, message: str, text: str | None = None, pos: int = 0):
        if text is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            message = f"{message} at line {line}, column {col}"
        super().__init__(message)
        self.pos = pos


# syntax tree nodes: plain tuples tagged by their first element
#   ("num", value) ("str", s) ("bool", b) ("name", ident) ("call", fname, args)
#   ("bin", op, a, b) ("neg", a)
#   ("cmp", field, op, const) ("and", parts) ("or", parts) ("not", p) ("const", b)
#   ("q", form, *args)


_NUMBER = re.compile(r"[0-9]+(\.[0-9]*)?([eE][+-]?[0-9]+)?|\.[0-9]+([eE][+-]?[0-9]+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_OPNAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*(\[[^\]]*\])?")
_QRE_FORMS = {"basic", "eps", "op", "subst", "else", "split", "iter", "compose"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # lexing helpers

    def skip(self):
        t = self.text
        while self.pos < len(t):
            c = t[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "#":
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl + 1
            else:
                break

    def error(self, msg):
        raise ParseError(msg, self.text, self.pos)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def take(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.take(s):
            found = self.text[self.pos : self.pos + 10] or "end of input"
            self.error(f"expected {s!r}, found {found!r}")

    def match(self, rx):
        self.skip()
        m = rx.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def ident(self) -> str:
        s = self.match(_IDENT)
        if s is None:
            self.error("expected an identifier")
        return s

    def done(self):
        self.skip()
        if self.pos != len(self.text):
            self.error(f"unexpected trailing input {self.text[self.pos:self.pos + 10]!r}")

    # constants

    def const(self):
        self.skip()
        t = self.text
        if self.pos < len(t) and t[self.pos] in "'\"":
            q = t[self.pos]
            end = t.find(q, self.pos + 1)
            if end < 0:
                self.error("unterminated string")
            s = t[self.pos + 1 : end]
            self.pos = end + 1
            return ("str", s)
        neg = self.take("-")
        num = self.match(_NUMBER)
        if num is not None:
            v = float(num) if any(c in num for c in ".eE") else int(num)
            return ("num", -v if neg else v)
        if neg:
            self.error("expected a number after '-'")
        word = self.match(_IDENT)
        if word is None:
            self.error("expected a constant")
        if word in ("true", "false"):
            return ("bool", word == "true")
        return ("str", word)

    # predicates

    def pred(self):
        parts = [self.conj()]
        while self.take("|"):
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else ("or", tuple(parts))

    def conj(self):
        parts = [self.unary()]
        while self.take("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else ("and", tuple(parts))

    def unary(self):
        if self.peek("!") and not self.peek("!="):
            self.pos += 1
            return ("not", self.unary())
        if self.take("("):
            p = self.pred()
            self.expect(")")
            return p
        name = self.ident()
        if name in ("true", "false") and not self._at_comparator():
            return ("const", name == "true")
        for op in ("<=", ">=", "==", "!=", "<", ">", "="):
            if self.take(op):
                return ("cmp", name, {"==": "="}.get(op, op), self.const())
        self.error(f"expected a comparison after {name!r}")

    def _at_comparator(self):
        return any(self.peek(op) for op in ("<", ">", "=", "!="))

    # lambdas

    def lam(self):
        a = self.term()
        while True:
            if self.take("+"):
                a = ("bin", "add", a, self.term())
            elif self.take("-"):
                a = ("bin", "diff", a, self.term())
            else:
                return a

    def term(self):
        a = self.factor()
        while True:
            if self.take("*"):
                a = ("bin", "mult", a, self.factor())
            elif self.take("/"):
                a = ("bin", "div", a, self.factor())
            else:
                return a

    def factor(self):
        if self.take("-"):
            return ("neg", self.factor())
        if self.take("("):
            a = self.lam()
            self.expect(")")
            return a
        self.skip()
        c = self.text[self.pos : self.pos + 1]
        if c.isdigit() or c in ".'\"":
            return self.const()
        name = self.match(_OPNAME)
        if name is None:
            self.error("expected a cost expression")
        if name in ("true", "false"):
            return ("bool", name == "true")
        if self.take("("):
            args = [self.lam()]
            while self.take(","):
                args.append(self.lam())
            self.expect(")")
            return ("call", name, tuple(args))
        if "[" in name or "-" in name:
            self.error(f"{name!r} is not a field or parameter name")
        return ("name", name)

    # QRE forms

    def qre(self):
        start = self.pos
        form = self.ident()
        if form not in _QRE_FORMS:
            self.pos = start
            self.error(f"unknown QRE form {form!r}")
        self.expect("(")
        if form == "basic":
            p = self.pred()
            self.expect(",")
            node = ("q", "basic", p, self.lam())
        elif form == "eps":
            node = ("q", "eps", self.lam())
        elif form == "op":
            name = self.opname()
            args = []
            while self.take(","):
                args.append(self.qre())
            if not args:
                self.error("op needs at least one operand")
            node = ("q", "op", name, tuple(args))
        elif form == "subst":
            f = self.qre()
            self.expect(",")
            x = self.ident()
            self.expect(",")
            node = ("q", "subst", f, x, self.qre())
        elif form in ("else", "compose"):
            f = self.qre()
            self.expect(",")
            node = ("q", form, f, self.qre())
        elif form == "split":
            name = self.opname()
            self.expect(",")
            f = self.qre()
            self.expect(",")
            node = ("q", "split", name, f, self.qre())
        else:
            first = self.opname()
            self.expect(",")
            self.skip()
            if self._at_qre():
                node = ("q", "iter", None, first, self.qre())
            else:
                p = self.ident()
                self.expect(",")
                node = ("q", "iter", first, p, self.qre())
            if self.take(","):
                node += (self.const(),)
        self.expect(")")
        return node

    def _at_qre(self):
        m = _IDENT.match(self.text, self.pos)
        if not m or m.group(0) not in _QRE_FORMS:
            return False
        j = m.end()
        while j < len(self.text) and self.text[j].isspace():
            j += 1
        return self.text.startswith("(", j)

    def opname(self) -> str:
        s = self.match(_OPNAME)
        if s is None:
            self.error("expected an operation name")
        return s


def parse_qre_syntax(text: str):
    """Parse QRE text into a syntax tree (no schema needed)."""
    p = _Parser(text)
    node = p.qre()
    p.done()
    return node


def string_constants(node) -> set:
    """All string constants a syntax tree mentions (candidate enum labels)."""
    out = set()

    def walk(n):
        if isinstance(n, tuple):
            if n and n[0] == "str":
                out.add(n[1])
                return
            for x in n:
                walk(x)

    walk(node)
    return out


# ---------------------------------------------------------------------------
# building


def resolve_operation(name: str, registry: OperationRegistry = REGISTRY) -> Operation:
    """Registry lookup, plus the parametrised forms ``inrange[lo,hi]``, ``inc[f]`` and ``scale[c]``."""
    if "[" not in name:
        try:
            return registry[name]
        except KeyError as exc:
            raise QreError(str(exc.args[0]), "unknown-operation") from None
    base, _, rest = name.partition("[")
    try:
        args = [_number(a) for a in rest.rstrip("]").split(",")]
    except ValueError:
        raise QreError(f"bad arguments in {name!r}", "unknown-operation") from None
    if base == "inrange" and len(args) == 2:
        return inrange(*args)
    if base == "inc" and len(args) == 1:
        return inc(Fraction(str(args[0])))
    if base == "scale" and len(args) == 1:
        return scale_by(args[0])
    raise QreError(f"unknown operation {name!r}", "unknown-operation")


def _number(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        return float(s)


def _const_value(node, kind: str | None = None):
    tag, v = node
    if kind == "enum":
        return str(v) if tag != "bool" else ("true" if v else "false")
    if tag == "str" and kind is not None:
        raise QreError(f"string constant {v!r} used with a {kind} field", "schema")
    return v


def _build_pred(node, schema: Schema) -> Predicate:
    tag = node[0]
    if tag == "const":
        return TRUE if node[1] else FALSE
    if tag == "not":
        return Not(_build_pred(node[1], schema))
    if tag in ("and", "or"):
        parts = [_build_pred(n, schema) for n in node[1]]
        out = parts[0]
        for q in parts[1:]:
            out = (out & q) if tag == "and" else (out | q)
        return out
    _, field, op, const = node
    if field not in schema.names:
        raise QreError(f"unknown field {field!r} in predicate", "schema")
    value = _const_value(const, schema.field(field).kind)
    if op == "!=":
        return Not(Cmp(field, "=", value))
    return Cmp(field, op, value)


def _build_lam(node, schema: Schema, param_types: dict, registry):
    tag = node[0]
    if tag in ("num", "bool"):
        return Lit(node[1])
    if tag == "str":
        return Lit(node[1], "any")
    if tag == "name":
        name = node[1]
        if name in schema.names:
            return FieldRef(name)
        return ParamRef(name, param_types.get(name, "real"))
    if tag == "neg":
        return Call(REGISTRY["neg"], _build_lam(node[1], schema, param_types, registry))
    if tag == "bin":
        return Call(
            REGISTRY[node[1]],
            _build_lam(node[2], schema, param_types, registry),
            _build_lam(node[3], schema, param_types, registry),
        )
    _, fname, args = node
    op = resolve_operation(fname, registry)
    return Call(op, *(_build_lam(a, schema, param_types, registry) for a in args))


def build_qre(node, schema: Schema, param_types: dict | None = None, registry=REGISTRY) -> QreExpr:
    """Build a syntax tree against ``schema``; construction checks raise :class:`QreError`."""
    types = dict(param_types or {})

    def go(n, sch):
        form = n[1]
        if form == "basic":
            return make_basic(_build_pred(n[2], sch), _build_lam(n[3], sch, types, registry), sch)
        if form == "eps":
            return make_eps(_build_lam(n[2], sch, types, registry), sch)
        if form == "op":
            return make_cost_op(resolve_operation(n[2], registry), [go(c, sch) for c in n[3]])
        if form == "subst":
            return make_subst(go(n[2], sch), n[3], go(n[4], sch))
        if form == "else":
            return make_else(go(n[2], sch), go(n[3], sch))
        if form == "split":
            return make_split(resolve_operation(n[2], registry), go(n[3], sch), go(n[4], sch))
        if form == "iter":
            opname, p, body = n[2], n[3], n[4]
            seed = n[5][1] if len(n) > 5 else BOTTOM
            f = go(body, sch)
            if opname is None and p in f.params:
                return make_iter(p, f, seed)
            return iter_op(resolve_operation(opname or "add", registry), f, seed, p)
        if form == "compose":
            from .qre import value_schema

            f = go(n[2], sch)
            return make_stream_compose(f, go(n[3], value_schema(f.ctype)))
        raise QreError(f"unknown form {form!r}", "syntax")

    return go(node, schema)


def parse_qre(text: str, schema: Schema, param_types: dict | None = None, registry=REGISTRY) -> QreExpr:
    return build_qre(parse_qre_syntax(text), schema, param_types, registry)


def parse_predicate(text: str, schema: Schema) -> Predicate:
    p = _Parser(text)
    node = p.pred()
    p.done()
    pred = _build_pred(node, schema)
    from .symbolic.predicates import validate

    validate(pred, schema)
    return pred


def parse_lambda(text: str, schema: Schema, param_types: dict | None = None, registry=REGISTRY):
    p = _Parser(text)
    node = p.lam()
    p.done()
    return _build_lam(node, schema, dict(param_types or {}), registry)

