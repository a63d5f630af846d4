"""Predicates over data items: an interval/boolean algebra with decidable satisfiability.

A predicate only ever inspects one data item.  Atoms compare a single field
against a constant; connectives are ``&``, ``|`` and ``~``.  Satisfiability is
decided by pushing negations to the atoms and expanding to disjunctive normal
form, where every conjunct is a box of per-field intervals (or label sets).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

__all__ = [
    "Field",
    "Schema",
    "SchemaError",
    "Predicate",
    "TRUE",
    "FALSE",
    "Const",
    "Cmp",
    "And",
    "Or",
    "Not",
    "var",
    "pred_eval",
    "pred_sat",
    "satisfying_item",
    "compile_predicate",
    "Minterms",
    "compute_minterms",
]

FIELD_KINDS = ("real", "integer", "boolean", "enum", "any")
COMPARATORS = ("<", "<=", "=", ">=", ">")


class SchemaError(ValueError):
    """A data item or predicate does not conform to its schema."""


@dataclass(frozen=True)
class Field:
    name: str
    kind: str = "real"
    labels: tuple = ()

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise SchemaError(f"unknown field kind {self.kind!r}")
        if self.kind == "enum" and not self.labels:
            raise SchemaError(f"enum field {self.name!r} needs at least one label")
        if self.kind == "boolean":
            object.__setattr__(self, "labels", (False, True))

    @property
    def numeric(self) -> bool:
        return self.kind in ("real", "integer")


@dataclass(frozen=True)
class Schema:
    """Ordered record layout of a data item.

    A *scalar* schema has exactly one field and its items are bare values
    rather than mappings; marker streams and intermediate streams produced by
    stream composition use scalar schemas.
    """

    fields: tuple
    scalar: bool = False

    def __post_init__(self):
        if not self.fields:
            raise SchemaError("schema needs at least one field")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate field names in {names}")
        if self.scalar and len(self.fields) != 1:
            raise SchemaError("a scalar schema has exactly one field")
        object.__setattr__(self, "_by_name", {f.name: f for f in self.fields})

    @classmethod
    def record(cls, *fields: Field | str) -> "Schema":
        return cls(tuple(f if isinstance(f, Field) else Field(f) for f in fields))

    @classmethod
    def single(cls, name: str = "v", kind: str = "real", labels: Sequence = ()) -> "Schema":
        return cls((Field(name, kind, tuple(labels)),), scalar=True)

    @property
    def names(self) -> tuple:
        return tuple(f.name for f in self.fields)

    def field(self, name: str) -> Field:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"no field {name!r} in schema {self.names}") from None

    def getter(self, name: str) -> Callable[[Any], Any]:
        self.field(name)
        if self.scalar:
            return _identity
        return lambda item: item[name]

    def get(self, item, name: str):
        if self.scalar:
            return item
        return item[name]

    def check(self, item) -> None:
        """Raise :class:`SchemaError` unless ``item`` conforms."""
        if self.scalar:
            _check_value(self.fields[0], item)
            return
        if not isinstance(item, Mapping):
            raise SchemaError(f"expected a record with fields {self.names}, got {item!r}")
        for f in self.fields:
            if f.name not in item:
                raise SchemaError(f"item {item!r} lacks field {f.name!r}")
            _check_value(f, item[f.name])

    def make_item(self, values: Mapping[str, Any]):
        if self.scalar:
            return values[self.fields[0].name]
        return {f.name: values[f.name] for f in self.fields}


def _identity(x):
    return x


def _check_value(f: Field, value) -> None:
    if f.kind in ("real", "integer"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"field {f.name!r} expects a number, got {value!r}")
        if f.kind == "integer" and isinstance(value, float) and not value.is_integer():
            raise SchemaError(f"field {f.name!r} expects an integer, got {value!r}")
    elif f.kind == "any":
        return
    elif value not in f.labels:
        raise SchemaError(f"field {f.name!r} expects one of {f.labels}, got {value!r}")


# ---------------------------------------------------------------------------
# predicate syntax tree


class Predicate:
    """Base class of the predicate formula tree.  Instances are immutable."""

    __slots__ = ()

    def __and__(self, other: "Predicate") -> "Predicate":
        return And((self, other))

    def __or__(self, other: "Predicate") -> "Predicate":
        return Or((self, other))

    def __invert__(self) -> "Predicate":
        return Not(self)

    def fields(self) -> frozenset:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Predicate):
    value: bool

    def fields(self):
        return frozenset()

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Cmp(Predicate):
    """``field op constant``; enum and boolean fields only admit ``=``."""

    field: str
    op: str
    const: Any

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise SchemaError(f"unknown comparator {self.op!r}")

    def fields(self):
        return frozenset((self.field,))

    def __str__(self):
        return f"{self.field} {self.op} {self.const}"


@dataclass(frozen=True)
class And(Predicate):
    args: tuple

    def fields(self):
        return frozenset().union(*(a.fields() for a in self.args))

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Predicate):
    args: tuple

    def fields(self):
        return frozenset().union(*(a.fields() for a in self.args))

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Not(Predicate):
    arg: Predicate

    def fields(self):
        return self.arg.fields()

    def __str__(self):
        return f"!{self.arg}"


class var:
    """Builder sugar: ``var("v") < 1`` yields ``Cmp("v", "<", 1)``."""

    def __init__(self, name: str):
        self.name = name

    def __lt__(self, c):
        return Cmp(self.name, "<", c)

    def __le__(self, c):
        return Cmp(self.name, "<=", c)

    def __gt__(self, c):
        return Cmp(self.name, ">", c)

    def __ge__(self, c):
        return Cmp(self.name, ">=", c)

    def eq(self, c):
        return Cmp(self.name, "=", c)


# ---------------------------------------------------------------------------
# evaluation


def validate(p: Predicate, schema: Schema) -> None:
    if isinstance(p, Const):
        return
    if isinstance(p, Cmp):
        f = schema.field(p.field)
        if f.kind == "any":
            raise SchemaError(f"{p}: field {f.name!r} holds opaque values and cannot be compared")
        if f.numeric:
            if isinstance(p.const, bool) or not isinstance(p.const, (int, float)):
                raise SchemaError(f"{p}: numeric field compared with {p.const!r}")
            if isinstance(p.const, float) and not math.isfinite(p.const):
                raise SchemaError(f"{p}: constant must be finite")
        else:
            if p.op != "=":
                raise SchemaError(f"{p}: {f.kind} field only supports '='")
            if p.const not in f.labels:
                raise SchemaError(f"{p}: {p.const!r} is not a label of {f.name!r}")
        return
    if isinstance(p, (And, Or)):
        for a in p.args:
            validate(a, schema)
        return
    if isinstance(p, Not):
        validate(p.arg, schema)
        return
    raise TypeError(f"not a predicate: {p!r}")


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
}


def compile_predicate(p: Predicate, schema: Schema) -> Callable[[Any], bool]:
    """Turn ``p`` into a fast closure ``item -> bool`` (no schema checks)."""
    validate(p, schema)
    return _compile(p, schema)


def _compile(p, schema):
    if isinstance(p, Const):
        v = p.value
        return lambda item: v
    if isinstance(p, Cmp):
        get = schema.getter(p.field)
        c = p.const
        op = p.op
        if op == "<":
            return lambda item: get(item) < c
        if op == "<=":
            return lambda item: get(item) <= c
        if op == "=":
            return lambda item: get(item) == c
        if op == ">=":
            return lambda item: get(item) >= c
        return lambda item: get(item) > c
    if isinstance(p, And):
        parts = [_compile(a, schema) for a in p.args]
        return lambda item: all(f(item) for f in parts)
    if isinstance(p, Or):
        parts = [_compile(a, schema) for a in p.args]
        return lambda item: any(f(item) for f in parts)
    inner = _compile(p.arg, schema)
    return lambda item: not inner(item)


def pred_eval(p: Predicate, item, schema: Schema) -> bool:
    """Truth of ``p`` on ``item``; raises :class:`SchemaError` on a malformed item."""
    schema.check(item)
    return bool(compile_predicate(p, schema)(item))


# ---------------------------------------------------------------------------
# satisfiability


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    lo_closed: bool = False
    hi: float = math.inf
    hi_closed: bool = False
    integer: bool = False

    def meet(self, other: "Interval") -> "Interval":
        if other.lo > self.lo or (other.lo == self.lo and not other.lo_closed):
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed
        if other.hi < self.hi or (other.hi == self.hi and not other.hi_closed):
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed
        return Interval(lo, lo_closed, hi, hi_closed, self.integer or other.integer)

    def _int_bounds(self):
        lo = self.lo
        if math.isfinite(lo):
            lo = math.ceil(lo) if self.lo_closed else math.floor(lo) + 1
        hi = self.hi
        if math.isfinite(hi):
            hi = math.floor(hi) if self.hi_closed else math.ceil(hi) - 1
        return lo, hi

    def empty(self) -> bool:
        if self.integer:
            lo, hi = self._int_bounds()
            return lo > hi
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def witness(self):
        if self.integer:
            lo, hi = self._int_bounds()
            if math.isfinite(lo):
                return int(lo)
            if math.isfinite(hi):
                return int(hi)
            return 0
        lo, hi = self.lo, self.hi
        if math.isfinite(lo) and math.isfinite(hi):
            return lo if lo == hi else (lo + hi) / 2
        if math.isfinite(lo):
            return lo if self.lo_closed else lo + 1
        if math.isfinite(hi):
            return hi if self.hi_closed else hi - 1
        return 0.0


def _atom_interval(op: str, c, integer: bool) -> list[Interval]:
    """Intervals whose union is ``{x : x op c}``."""
    if op == "<":
        return [Interval(hi=c, integer=integer)]
    if op == "<=":
        return [Interval(hi=c, hi_closed=True, integer=integer)]
    if op == ">":
        return [Interval(lo=c, integer=integer)]
    if op == ">=":
        return [Interval(lo=c, lo_closed=True, integer=integer)]
    return [Interval(c, True, c, True, integer)]


_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}


def _literal_boxes(p: Cmp, negated: bool, schema: Schema) -> list[dict]:
    f = schema.field(p.field)
    if not f.numeric:
        allowed = frozenset(f.labels) - {p.const} if negated else frozenset((p.const,))
        return [{f.name: allowed}]
    integer = f.kind == "integer"
    if not negated:
        ivs = _atom_interval(p.op, p.const, integer)
    elif p.op == "=":
        ivs = _atom_interval("<", p.const, integer) + _atom_interval(">", p.const, integer)
    else:
        ivs = _atom_interval(_NEGATE[p.op], p.const, integer)
    return [{f.name: iv} for iv in ivs]


def _meet_boxes(a: dict, b: dict):
    out = dict(a)
    for name, c in b.items():
        if name in out:
            cur = out[name]
            c = cur.meet(c) if isinstance(c, Interval) else (cur & c)
        if (c.empty() if isinstance(c, Interval) else not c):
            return None
        out[name] = c
    return out


def _dnf(p: Predicate, negated: bool, schema: Schema) -> list[dict]:
    """Satisfiable conjuncts (field -> constraint boxes) of ``p`` (or ``~p``)."""
    if isinstance(p, Const):
        return [{}] if p.value != negated else []
    if isinstance(p, Cmp):
        return [b for b in _literal_boxes(p, negated, schema) if _meet_boxes({}, b) is not None]
    if isinstance(p, Not):
        return _dnf(p.arg, not negated, schema)
    conj = isinstance(p, And) != negated
    if not conj:
        out = []
        for a in p.args:
            out.extend(_dnf(a, negated, schema))
        return out
    boxes = [{}]
    for a in p.args:
        nxt = []
        for left in boxes:
            for right in _dnf(a, negated, schema):
                m = _meet_boxes(left, right)
                if m is not None:
                    nxt.append(m)
        boxes = nxt
        if not boxes:
            break
    return boxes


def _box_item(box: dict, schema: Schema):
    values = {}
    for f in schema.fields:
        c = box.get(f.name)
        if f.numeric:
            iv = c if c is not None else Interval(integer=f.kind == "integer")
            v = iv.witness()
            values[f.name] = float(v) if f.kind == "real" else int(v)
        elif f.kind == "any":
            values[f.name] = None
        else:
            allowed = c if c is not None else frozenset(f.labels)
            values[f.name] = next(l for l in f.labels if l in allowed)
    return schema.make_item(values)


def pred_sat(p: Predicate, schema: Schema) -> bool:
    """True iff some item conforming to ``schema`` satisfies ``p``."""
    validate(p, schema)
    return bool(_dnf(p, False, schema))


def satisfying_item(p: Predicate, schema: Schema):
    """A deterministic witness item for ``p``, or ``None`` when unsatisfiable."""
    validate(p, schema)
    boxes = _dnf(p, False, schema)
    if not boxes:
        return None
    return _box_item(boxes[0], schema)


# ---------------------------------------------------------------------------
# minterms


@dataclass(frozen=True)
class Cell:
    signs: tuple
    predicate: Predicate
    witness: Any


@dataclass
class Minterms:
    """Partition of the data domain induced by ``atoms``.

    ``cells[k].signs[j]`` is the truth value of ``atoms[j]`` on cell ``k``.
    """

    schema: Schema
    atoms: tuple
    cells: list
    _index: dict = field(default_factory=dict, repr=False)
    _tests: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._index = {c.signs: k for k, c in enumerate(self.cells)}
        self._tests = [_compile(a, self.schema) for a in self.atoms]

    def __len__(self):
        return len(self.cells)

    def classify(self, item) -> int:
        """Index of the cell containing ``item``."""
        return self._index[tuple(bool(t(item)) for t in self._tests)]

    def truth(self, cell: int, atom: Predicate) -> bool:
        return self.cells[cell].signs[self.atoms.index(atom)]

    @property
    def witnesses(self) -> list:
        return [c.witness for c in self.cells]


def compute_minterms(atoms: Iterable[Predicate], schema: Schema) -> Minterms:
    """Satisfiable sign assignments of ``atoms`` with one witness each.

    Splits cell by cell and discards unsatisfiable branches early, so the work
    is proportional to the number of surviving cells rather than ``2**n``.
    """
    uniq = []
    for a in atoms:
        validate(a, schema)
        if a not in uniq:
            uniq.append(a)
    cells = [((), [])]
    for a in uniq:
        nxt = []
        for signs, parts in cells:
            for sign in (True, False):
                lit = a if sign else Not(a)
                conj = And(tuple(parts + [lit]))
                if _dnf(conj, False, schema):
                    nxt.append((signs + (sign,), parts + [lit]))
        cells = nxt
    out = []
    for signs, parts in cells:
        conj = And(tuple(parts)) if parts else TRUE
        out.append(Cell(signs, conj, satisfying_item(conj, schema)))
    return Minterms(schema, tuple(uniq), out)
