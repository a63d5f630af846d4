"""Symbolic unambiguous regular expressions.

Every public constructor decides the side condition of its rule before it
returns: unions need disjoint operands, concatenations need a unique split
point for every word, stars need unique factorisation.  A value of type
:class:`SymbolicRegex` is therefore well formed by construction.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .predicates import Predicate, Schema, SchemaError, TRUE, validate

__all__ = [
    "SymbolicRegex",
    "Epsilon",
    "Atom",
    "Union",
    "Concat",
    "Star",
    "RegexError",
    "eps",
    "atom",
    "union",
    "concat",
    "star",
    "concat_all",
    "union_all",
    "repeat",
    "repeat_range",
    "plus",
    "anything",
    "reverse",
]


class RegexError(ValueError):
    """A construction rule's side condition does not hold."""

    def __init__(self, message: str, rule: str = "", witness=None):
        super().__init__(message)
        self.rule = rule
        self.witness = witness


class SymbolicRegex:
    """Immutable regex node over predicates of one schema."""

    __slots__ = ("schema", "_hash", "_atoms", "nullable", "fixed_length", "size", "depth", "proof")

    kind = "?"

    def _init_meta(self, schema, key, atoms, nullable, fixed, size, depth, proof=None):
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "_hash", hash((self.kind, key)))
        object.__setattr__(self, "_atoms", atoms)
        object.__setattr__(self, "nullable", nullable)
        object.__setattr__(self, "fixed_length", fixed)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "depth", depth)
        object.__setattr__(self, "proof", proof)

    def __setattr__(self, name, value):
        raise AttributeError("SymbolicRegex is immutable")

    def __hash__(self):
        return self._hash

    @property
    def atoms(self) -> tuple:
        """Distinct atom predicates in first-occurrence order."""
        return self._atoms

    def children(self) -> tuple:
        return ()

    # convenience operators build *checked* nodes
    def __or__(self, other):
        return union(self, other)

    def __add__(self, other):
        return concat(self, other)


def _merge_atoms(*groups):
    out = []
    for g in groups:
        for a in g:
            if a not in out:
                out.append(a)
    return tuple(out)


def _same_schema(a: SymbolicRegex, b: SymbolicRegex) -> Schema:
    if a.schema != b.schema:
        raise SchemaError("regex operands are over different schemas")
    return a.schema


class Epsilon(SymbolicRegex):
    __slots__ = ()
    kind = "eps"

    def __init__(self, schema: Schema):
        self._init_meta(schema, schema, (), True, 0, 1, 0)

    __hash__ = SymbolicRegex.__hash__

    def __eq__(self, other):
        return isinstance(other, Epsilon) and other.schema == self.schema

    def __repr__(self):
        return "ε"


class Atom(SymbolicRegex):
    __slots__ = ("predicate",)
    kind = "atom"

    def __init__(self, predicate: Predicate, schema: Schema):
        validate(predicate, schema)
        object.__setattr__(self, "predicate", predicate)
        self._init_meta(schema, predicate, (predicate,), False, 1, 1, 0)

    __hash__ = SymbolicRegex.__hash__

    def __eq__(self, other):
        return (
            isinstance(other, Atom)
            and other._hash == self._hash
            and other.predicate == self.predicate
            and other.schema == self.schema
        )

    def __repr__(self):
        return f"[{self.predicate}]"


class _Binary(SymbolicRegex):
    __slots__ = ("left", "right")

    __hash__ = SymbolicRegex.__hash__

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and other._hash == self._hash
            and other.left == self.left
            and other.right == self.right
        )

    def children(self):
        return (self.left, self.right)


class Union(_Binary):
    __slots__ = ()
    kind = "union"

    def __init__(self, left, right, *, check: bool = True):
        schema = _same_schema(left, right)
        proof = None
        if check:
            from .automata import check_disjoint_detail

            res = check_disjoint_detail(left, right)
            if not res.ok:
                raise RegexError(
                    f"union operands are not disjoint: {left!r} | {right!r}",
                    rule="disjoint",
                    witness=res.witness,
                )
            proof = "disjoint"
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        fl = left.fixed_length if left.fixed_length == right.fixed_length else None
        self._init_meta(
            schema,
            (left._hash, right._hash),
            _merge_atoms(left.atoms, right.atoms),
            left.nullable or right.nullable,
            fl,
            left.size + right.size + 1,
            max(left.depth, right.depth) + 1,
            proof,
        )

    def __repr__(self):
        return f"({self.left!r}|{self.right!r})"


class Concat(_Binary):
    __slots__ = ()
    kind = "concat"

    def __init__(self, left, right, *, check: bool = True):
        schema = _same_schema(left, right)
        proof = None
        if check:
            from .automata import check_unamb_concat_detail

            res = check_unamb_concat_detail(left, right)
            if not res.ok:
                raise RegexError(
                    f"concatenation is ambiguous: {left!r} · {right!r}",
                    rule="unambiguous-concatenation",
                    witness=res.witness,
                )
            proof = "unambiguous-concatenation"
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        fl = None
        if left.fixed_length is not None and right.fixed_length is not None:
            fl = left.fixed_length + right.fixed_length
        self._init_meta(
            schema,
            (left._hash, right._hash),
            _merge_atoms(left.atoms, right.atoms),
            left.nullable and right.nullable,
            fl,
            left.size + right.size + 1,
            max(left.depth, right.depth) + 1,
            proof,
        )

    def __repr__(self):
        return f"{self.left!r}{self.right!r}"


class Star(SymbolicRegex):
    __slots__ = ("inner",)
    kind = "star"

    def __init__(self, inner, *, check: bool = True):
        proof = None
        if check:
            from .automata import check_unamb_iter_detail

            res = check_unamb_iter_detail(inner)
            if not res.ok:
                raise RegexError(
                    f"star operand is not unambiguously iterable: {inner!r} ({res.reason})",
                    rule="unambiguous-iteration",
                    witness=res.witness,
                )
            proof = "unambiguous-iteration"
        object.__setattr__(self, "inner", inner)
        self._init_meta(
            inner.schema,
            inner._hash,
            inner.atoms,
            True,
            0 if inner.fixed_length == 0 else None,
            inner.size + 1,
            inner.depth + 1,
            proof,
        )

    __hash__ = SymbolicRegex.__hash__

    def __eq__(self, other):
        return isinstance(other, Star) and other._hash == self._hash and other.inner == self.inner

    def children(self):
        return (self.inner,)

    def __repr__(self):
        return f"({self.inner!r})*"


# ---------------------------------------------------------------------------
# checked constructors and derived forms


def eps(schema: Schema) -> Epsilon:
    return Epsilon(schema)


def atom(predicate: Predicate, schema: Schema) -> Atom:
    return Atom(predicate, schema)


def union(a: SymbolicRegex, b: SymbolicRegex) -> Union:
    return Union(a, b)


def concat(a: SymbolicRegex, b: SymbolicRegex) -> Concat:
    return Concat(a, b)


def star(a: SymbolicRegex) -> Star:
    return Star(a)


def anything(schema: Schema) -> Star:
    """All strings over the schema, ``[true]*``."""
    return Star(Atom(TRUE, schema))


def concat_all(parts: Sequence[SymbolicRegex]) -> SymbolicRegex:
    """Balanced concatenation of ``parts`` (left-to-right order preserved)."""
    if not parts:
        raise ValueError("concat_all needs at least one operand")
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return Concat(concat_all(parts[:mid]), concat_all(parts[mid:]))


def union_all(parts: Sequence[SymbolicRegex]) -> SymbolicRegex:
    if not parts:
        raise ValueError("union_all needs at least one operand")
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return Union(union_all(parts[:mid]), union_all(parts[mid:]))


def repeat(r: SymbolicRegex, k: int) -> SymbolicRegex:
    """``r`` concatenated ``k`` times (``ε`` for ``k == 0``)."""
    if k < 0:
        raise ValueError("repeat count must be nonnegative")
    if k == 0:
        return Epsilon(r.schema)
    if k == 1:
        return r
    half = repeat(r, k // 2)
    rest = repeat(r, k - k // 2)
    return Concat(half, rest)


def repeat_range(r: SymbolicRegex, lo: int, hi: int) -> SymbolicRegex:
    """Between ``lo`` and ``hi`` copies of ``r``, as a union of exact repeats."""
    if lo < 0 or hi < lo:
        raise ValueError(f"bad repetition bounds {lo}:{hi}")
    return union_all([repeat(r, k) for k in range(lo, hi + 1)])


def plus(r: SymbolicRegex) -> SymbolicRegex:
    return Concat(r, Star(r))


def reverse(r: SymbolicRegex) -> SymbolicRegex:
    """Unchecked mirror image; used for suffix matching."""
    if isinstance(r, (Epsilon, Atom)):
        return r
    if isinstance(r, Union):
        return Union(reverse(r.left), reverse(r.right), check=False)
    if isinstance(r, Concat):
        return Concat(reverse(r.right), reverse(r.left), check=False)
    return Star(reverse(r.inner), check=False)


def iter_nodes(r: SymbolicRegex) -> Iterable[SymbolicRegex]:
    stack = [r]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.children())
