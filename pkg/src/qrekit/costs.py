"""Cost types, the operation registry and symbolic cost terms.

Costs are plain Python values.  When a parameter has no value yet (inside a
substitution, whose bound value is only known once the whole stream is
seen) the cost is a :class:`Term` tree instead; :func:`apply` folds constants
eagerly so a term only keeps the parts that depend on free parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

__all__ = [
    "COST_TYPES",
    "BOTTOM",
    "Operation",
    "OperationRegistry",
    "REGISTRY",
    "Term",
    "Param",
    "App",
    "apply",
    "substitute",
    "is_symbolic",
    "types_compatible",
    "TimeSet",
    "inrange",
    "inc",
    "local_max3",
    "conn_delta_op",
    "scale_by",
]

COST_TYPES = ("real", "integer", "boolean", "mset", "iset", "tuple", "unit", "any")


class _Bottom:
    """The undefined value."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "⊥"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


def types_compatible(a: str, b: str) -> bool:
    if a == b or a == "any" or b == "any":
        return True
    return {a, b} == {"integer", "real"}


# ---------------------------------------------------------------------------
# operations


@dataclass(frozen=True, eq=False)
class Operation:
    """A named pure function on cost values.

    ``arity`` is ``None`` for variadic operations.  ``result`` is a cost type
    name or a callable from argument types to one.  ``cost_bound`` is the
    declared per-call cost in abstract units; the streaming evaluator relies
    on it being a constant.
    """

    name: str
    func: Callable
    arity: int | None = 2
    arg_types: tuple | None = None
    result: Any = "real"
    cost_bound: int = 1
    associative: bool = False

    def __call__(self, *args):
        return self.func(*args)

    def result_type(self, arg_types: Sequence[str]) -> str:
        self.check(arg_types)
        if callable(self.result):
            return self.result(tuple(arg_types))
        return self.result

    def check(self, arg_types: Sequence[str]) -> None:
        if self.arity is not None and len(arg_types) != self.arity:
            raise TypeError(f"operation {self.name} takes {self.arity} arguments, got {len(arg_types)}")
        if self.arg_types is not None:
            for want, got in zip(self.arg_types, arg_types):
                if not types_compatible(want, got):
                    raise TypeError(f"operation {self.name}: expected {want}, got {got}")

    def __repr__(self):
        return f"<op {self.name}>"


def _numeric_result(types):
    return "integer" if types and all(t == "integer" for t in types) else "real"


def _mean(*xs):
    return sum(xs) / len(xs)


def _window_mean(state):
    window = state
    if not window:
        return 0.0
    return math.fsum(window) / len(window)


def _window_std(state):
    window = state
    n = len(window)
    if n == 0:
        return 0.0
    mu = math.fsum(window) / n
    return math.sqrt(max(0.0, math.fsum((x - mu) ** 2 for x in window) / n))


class OperationRegistry:
    """Name -> :class:`Operation` table used by the text format and builders."""

    def __init__(self, ops: Iterable[Operation] = ()):
        self._ops: dict[str, Operation] = {}
        for op in ops:
            self.register(op)

    def register(self, op: Operation) -> Operation:
        if op.name in self._ops:
            raise ValueError(f"operation {op.name!r} already registered")
        self._ops[op.name] = op
        return op

    def __getitem__(self, name: str) -> Operation:
        try:
            return self._ops[name]
        except KeyError:
            raise KeyError(f"unknown operation {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._ops

    def names(self) -> list[str]:
        return sorted(self._ops)

    def copy(self) -> "OperationRegistry":
        return OperationRegistry(self._ops.values())


def _div(x, y):
    return x / y if y != 0 else 0.0


def _pair(x, y):
    return (x, y)


def _append(t, x):
    return tuple(t) + (x,)


REGISTRY = OperationRegistry(
    [
        Operation("add", lambda x, y: x + y, 2, ("real", "real"), _numeric_result, associative=True),
        Operation("sum", lambda *xs: sum(xs), None, None, _numeric_result),
        Operation("diff", lambda x, y: x - y, 2, ("real", "real"), _numeric_result),
        Operation("mult", lambda x, y: x * y, 2, ("real", "real"), _numeric_result, associative=True),
        Operation("div", _div, 2, ("real", "real"), "real"),
        Operation("neg", lambda x: -x, 1, ("real",), _numeric_result),
        Operation("abs", abs, 1, ("real",), _numeric_result),
        Operation("square", lambda x: x * x, 1, ("real",), _numeric_result),
        Operation("avg", _mean, None, None, "real"),
        Operation("max", max, 2, ("real", "real"), _numeric_result, associative=True),
        Operation("min", min, 2, ("real", "real"), _numeric_result, associative=True),
        # non-strict on purpose: true when the first argument is >= the second
        Operation("gt", lambda x, y: x >= y, 2, ("real", "real"), "boolean"),
        Operation("lt", lambda x, y: x < y, 2, ("real", "real"), "boolean"),
        Operation("left", lambda x, y: x, 2, None, lambda ts: ts[0]),
        Operation("right", lambda x, y: y, 2, None, lambda ts: ts[1]),
        Operation("and", lambda x, y: bool(x and y), 2, ("boolean", "boolean"), "boolean", associative=True),
        Operation("or", lambda x, y: bool(x or y), 2, ("boolean", "boolean"), "boolean", associative=True),
        Operation("not", lambda x: not x, 1, ("boolean",), "boolean"),
        Operation("pair", _pair, 2, None, "tuple"),
        Operation("first", lambda t: t[0], 1, ("tuple",), "any"),
        Operation("second", lambda t: t[1], 1, ("tuple",), "any"),
        Operation("append", _append, 2, ("tuple", "any"), "tuple"),
        Operation("union-insert", lambda s, x: s.insert(x), 2, ("iset", "integer"), "iset"),
        Operation("window-mean", _window_mean, 1, ("tuple",), "real"),
        Operation("window-std", _window_std, 1, ("tuple",), "real"),
        Operation("mset-insert", lambda m, x: tuple(sorted(m + (x,))), 2, ("mset", "real"), "mset"),
    ]
)


# parametrised operations: factories returning fresh Operation values


def inrange(lo, hi) -> Operation:
    """``lo <= x <= hi``."""
    return Operation(f"inrange[{lo},{hi}]", lambda x: lo <= x <= hi, 1, ("real",), "boolean")


def inc(factor=Fraction(4, 5)) -> Operation:
    """True when ``factor * x >= y``; exact for rational ``factor`` on integer-valued averages."""
    f = Fraction(factor).limit_denominator(10**6)
    num, den = f.numerator, f.denominator

    def run(x, y):
        return num * x >= den * y

    return Operation(f"inc[{f}]", run, 2, ("real", "real"), "boolean")


def scale_by(c) -> Operation:
    return Operation(f"scale[{c}]", lambda x: x * c, 1, ("real",), "real")


def local_max3(threshold) -> Operation:
    """Combine ``(a, (b, c))``: 1 if ``b`` is a strict local maximum above ``threshold``."""

    def run(a, bc):
        b, c = bc
        return 1 if (b > a and b > c and b > threshold) else 0

    return Operation(f"lm3[{threshold}]", run, 2, ("real", "tuple"), "integer")


def conn_delta_op(delta) -> Operation:
    """Variadic chaining filter; arguments ordered from the coarsest scale down."""
    from .detectors import conn_delta

    def run(*sets):
        return TimeSet.from_iterable(conn_delta(list(sets), delta))

    return Operation(f"conn[{delta}]", run, None, None, "iset")


# ---------------------------------------------------------------------------
# persistent integer set


class TimeSet:
    """Immutable set of integers with O(1) insertion (shared cons cells)."""

    __slots__ = ("_head", "_tail", "_size", "_frozen")

    def __init__(self, head=None, tail=None, size=0):
        self._head = head
        self._tail = tail
        self._size = size
        self._frozen = None

    @classmethod
    def from_iterable(cls, xs: Iterable[int]) -> "TimeSet":
        out = EMPTY_TIMES
        for x in sorted(set(xs)):
            out = out.insert(x)
        return out

    def insert(self, x: int) -> "TimeSet":
        if x in self:
            return self
        return TimeSet(x, self, self._size + 1)

    def frozen(self) -> frozenset:
        if self._frozen is None:
            items = []
            node = self
            while node is not None and node._size:
                items.append(node._head)
                node = node._tail
            self._frozen = frozenset(items)
        return self._frozen

    def __contains__(self, x):
        if self._frozen is not None:
            return x in self._frozen
        node = self
        while node is not None and node._size:
            if node._head == x:
                return True
            node = node._tail
        return False

    def __iter__(self):
        return iter(sorted(self.frozen()))

    def __len__(self):
        return self._size

    def __eq__(self, other):
        if isinstance(other, TimeSet):
            return self.frozen() == other.frozen()
        if isinstance(other, (set, frozenset)):
            return self.frozen() == other
        return NotImplemented

    def __hash__(self):
        return hash(self.frozen())

    def __repr__(self):
        return "TimeSet(" + repr(sorted(self.frozen())) + ")"


EMPTY_TIMES = TimeSet()


# ---------------------------------------------------------------------------
# symbolic terms


class Term:
    """A cost value that still mentions free parameters."""

    __slots__ = ()


@dataclass(frozen=True)
class Param(Term):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    op: Operation
    args: tuple

    def __repr__(self):
        return f"{self.op.name}({', '.join(map(repr, self.args))})"


def is_symbolic(x) -> bool:
    return isinstance(x, Term)


def apply(op: Operation, args: Sequence[Any]):
    """``op(*args)``, folding to a value whenever no argument is symbolic."""
    if not any(isinstance(a, Term) for a in args):
        return op.func(*args)
    if op.name == "left":
        return args[0]
    if op.name == "right":
        return args[1]
    if op.associative and len(args) == 2:
        a, b = args
        if isinstance(b, Term) and not isinstance(a, Term):
            a, b = b, a
        if not isinstance(b, Term) and isinstance(a, App) and a.op is op and not isinstance(a.args[1], Term):
            # op(op(t, c1), c2) -> op(t, op(c1, c2)): keeps terms bounded under folds
            return App(op, (a.args[0], op.func(a.args[1], b)))
        return App(op, (a, b))
    return App(op, tuple(args))


def substitute(term, name: str, value):
    """Replace ``Param(name)`` by ``value`` and refold."""
    if not isinstance(term, Term):
        return term
    if isinstance(term, Param):
        return value if term.name == name else term
    return apply(term.op, [substitute(a, name, value) for a in term.args])


def free_params(term) -> set:
    if isinstance(term, Param):
        return {term.name}
    if isinstance(term, App):
        out = set()
        for a in term.args:
            out |= free_params(a)
        return out
    return set()
