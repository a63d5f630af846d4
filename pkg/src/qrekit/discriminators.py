"""Rhythm discriminators over beat-marker streams."""
from __future__ import annotations

from fractions import Fraction

from .costs import Operation, inc, inrange, scale_by
from .qre import (
    Call,
    FieldRef,
    ParamRef,
    QreExpr,
    iter_op,
    lift,
    make_basic,
    make_cost_op,
    make_else,
    make_iter,
    make_split,
    make_stream_compose,
    value_schema,
)
from .symbolic import TRUE, Schema, anything, atom, concat_all, repeat_range, var

__all__ = [
    "BEATS",
    "CHAMBERS",
    "iter_k",
    "beat_indicator",
    "qre_count_in_range",
    "qre_interval_length",
    "qre_four_beats",
    "qre_sudden_onset",
    "qre_pattern",
    "qre_last_value",
    "qre_sliding",
    "qre_heart_rate",
    "qre_stability",
    "qre_rate_compare",
]

BEATS = value_schema("integer")
CHAMBERS = Schema.single("c", "enum", ("0", "A", "V"))
REALS = value_schema("real")


def iter_k(op, f: QreExpr, k: int) -> QreExpr:
    """``op`` over exactly ``k`` consecutive blocks of ``f`` (balanced split tree)."""
    if k < 1:
        raise ValueError("block count must be at least 1")
    if k == 1:
        return f
    h = k // 2
    return make_split(op, iter_k(op, f, h), iter_k(op, f, k - h))


def beat_indicator() -> QreExpr:
    """``(v = 1) ? 1 else 0`` on one marker."""
    beat = var("v").eq(1)
    return make_else(make_basic(beat, 1, BEATS), make_basic(~beat, 0, BEATS))


def qre_count_in_range(lo: int, hi: int, window: int = 60) -> QreExpr:
    """True iff the ``window``-item stream has between ``lo`` and ``hi`` beats."""
    if not 0 <= lo <= hi:
        raise ValueError(f"need 0 <= lo <= hi, got {lo}, {hi}")
    return make_cost_op(inrange(lo, hi), [iter_k("add", beat_indicator(), window)])


def qre_interval_length() -> QreExpr:
    """On ``0^k 1``: the cycle length ``k + 1``."""
    count_zeros = iter_op("add", make_basic(~var("v").eq(1), 1, BEATS), 0)
    return make_split("add", count_zeros, make_basic(var("v").eq(1), 1, BEATS))


def qre_four_beats() -> QreExpr:
    """Average cycle length over four consecutive intervals."""
    return make_cost_op(scale_by(Fraction(1, 4)), [iter_k("add", qre_interval_length(), 4)])


def qre_sudden_onset(factor=Fraction(4, 5)) -> QreExpr:
    """On eight intervals: ``factor · avg(first four) >= avg(last four)``."""
    return make_split(inc(factor), qre_four_beats(), qre_four_beats())


def qre_pattern(a: int, b: int, c: int, d: int, e: int, f: int, g: int, h: int) -> QreExpr:
    """True on ``V 0^{a:b} A 0^{c:d} V 0^{e:f} A 0^{g:h} V``, undefined elsewhere."""
    bounds = [(a, b), (c, d), (e, f), (g, h)]
    for lo, hi in bounds:
        if not 0 <= lo <= hi:
            raise ValueError(f"bad repetition bounds {lo}:{hi}")
    sym = {k: atom(var("c").eq(k), CHAMBERS) for k in ("0", "A", "V")}
    parts = [sym["V"]]
    for (lo, hi), chamber in zip(bounds, ("A", "V", "A", "V")):
        parts.append(repeat_range(sym["0"], lo, hi))
        parts.append(sym[chamber])
    return lift(concat_all(parts), True, "boolean")


def qre_last_value(schema: Schema = BEATS) -> QreExpr:
    """Value of the latest item: ``split-right(true*, true ? v)``."""
    name = schema.fields[0].name
    return make_split("right", lift(anything(schema), 0, "integer"), make_basic(TRUE, FieldRef(name), schema))


def _push_op(window: int) -> Operation:
    def run(buf, x):
        out = buf + (x,)
        return out[-window:] if len(out) > window else out

    return Operation(f"window-push[{window}]", run, 2, ("tuple", "real"), "tuple")


def qre_sliding(window: int, kind: str = "mean") -> QreExpr:
    """Mean or population standard deviation of the last ``window`` values.

    Fewer than ``window`` values so far: aggregate what is there; on the
    empty stream the result is 0.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    agg = {"mean": "window-mean", "std": "window-std"}.get(kind)
    if agg is None:
        raise ValueError(f"unknown aggregation {kind!r}")
    push = make_basic(TRUE, Call(_push_op(window), ParamRef("buf", "tuple"), FieldRef("v")), REALS)
    buf = make_iter("buf", push, init=())
    return make_cost_op(agg, [buf])


def qre_heart_rate(window: int, producer: QreExpr | None = None) -> QreExpr:
    """Sliding mean of the 0/1 emissions of ``producer`` (default: the markers themselves)."""
    return make_stream_compose(producer or qre_last_value(), qre_sliding(window, "mean"))


def qre_stability(window: int, producer: QreExpr | None = None) -> QreExpr:
    return make_stream_compose(producer or qre_last_value(), qre_sliding(window, "std"))


def qre_rate_compare(f_v: QreExpr, f_a: QreExpr) -> QreExpr:
    """``gt(f_V, f_A)``: true when the first rate is at least the second."""
    return make_cost_op("gt", [f_v, f_a])
