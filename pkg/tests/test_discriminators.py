import itertools
import math
import random
from fractions import Fraction

import pytest

from oracles import onset_direct
from qrekit.costs import BOTTOM
from qrekit.discriminators import (
    beat_indicator,
    iter_k,
    qre_count_in_range,
    qre_four_beats,
    qre_heart_rate,
    qre_interval_length,
    qre_last_value,
    qre_pattern,
    qre_rate_compare,
    qre_sliding,
    qre_stability,
    qre_sudden_onset,
)
from qrekit.qre import Call, FieldRef, lift, make_basic, make_split, make_stream_compose, value_schema
from qrekit.reference import eval_reference
from qrekit.streaming import compile_streaming
from qrekit.symbolic import TRUE, anything


def run(expr, items):
    return compile_streaming(expr, validate=False).feed(items).output()


def beats(intervals):
    return [b for c in intervals for b in [0] * (c - 1) + [1]]


# count in range


def test_count_all_zero_window():
    assert run(qre_count_in_range(0, 5), [0] * 60) is True


def test_count_seven_ones():
    w = [1] * 7 + [0] * 53
    assert run(qre_count_in_range(5, 6), w) is False
    assert run(qre_count_in_range(5, 7), w) is True


def test_count_wrong_length():
    assert run(qre_count_in_range(0, 60), [0] * 59) is BOTTOM
    assert run(qre_count_in_range(0, 60), [0] * 61) is BOTTOM


def test_count_configured_range_unreachable():
    # 120..150 beats cannot occur among 60 one-per-sample markers
    q = qre_count_in_range(120, 150)
    assert run(q, [1] * 60) is False


def test_count_random_windows():
    rng = random.Random(0)
    q = qre_count_in_range(20, 35)
    for _ in range(200):
        w = [int(rng.random() < 0.45) for _ in range(60)]
        assert run(q, w) == (20 <= sum(w) <= 35)


def test_count_bad_range():
    with pytest.raises(ValueError):
        qre_count_in_range(3, 2)


def test_iter_k():
    assert eval_reference(iter_k("add", beat_indicator(), 3), [1, 0, 1]) == 2
    assert eval_reference(iter_k("add", beat_indicator(), 3), [1, 0]) is BOTTOM
    with pytest.raises(ValueError):
        iter_k("add", beat_indicator(), 0)


# interval length and onset


@pytest.mark.parametrize("w,want", [([0, 0, 0, 1], 4), ([1], 1), ([0, 0], BOTTOM), ([1, 0], BOTTOM)])
def test_interval_length(w, want):
    assert eval_reference(qre_interval_length(), w) == want


def test_four_beats():
    assert eval_reference(qre_four_beats(), beats([2, 4, 6, 8])) == 5


@pytest.mark.parametrize(
    "first,second,want",
    [([10] * 4, [8] * 4, True), ([10] * 4, [10] * 4, False), ([10, 10, 10, 10], [8, 8, 8, 9], False)],
)
def test_sudden_onset(first, second, want):
    assert run(qre_sudden_onset(), beats(first + second)) is want


def test_onset_just_below_ratio():
    # averages 100 and 81: 0.8 * 100 = 80 < 81
    assert run(qre_sudden_onset(), beats([100] * 4 + [81] * 4)) is False
    assert run(qre_sudden_onset(), beats([100] * 4 + [80] * 4)) is True
    assert run(qre_sudden_onset(Fraction(9, 10)), beats([100] * 4 + [81] * 4)) is True


def test_onset_scale_invariance():
    rng = random.Random(5)
    q = qre_sudden_onset()
    for _ in range(60):
        cls = [rng.randint(1, 12) for _ in range(8)]
        base = run(q, beats(cls))
        assert base == onset_direct(cls)
        for k in (2, 3):
            assert run(q, beats([k * c for c in cls])) == base


# pattern


def test_pattern_examples():
    q = qre_pattern(1, 2, 1, 2, 1, 2, 1, 2)
    assert run(q, list("V0A0V0A0V")) is True
    assert run(q, list("VA0V0A0V")) is BOTTOM
    assert run(q, list("V0A0V0A0")) is BOTTOM
    assert run(q, list("V00A0V0A00V")) is True
    assert run(q, list("V000A0V0A0V")) is BOTTOM


def test_pattern_bad_bounds():
    with pytest.raises(ValueError):
        qre_pattern(2, 1, 0, 0, 0, 0, 0, 0)


# sliding windows


def test_last_value():
    assert [o for o in compile_streaming(qre_last_value()).outputs([3, 1, 4])] == [3, 1, 4]
    assert run(qre_last_value(), []) is BOTTOM


@pytest.mark.parametrize("window", [1, 3, 7])
def test_heart_rate_constant(window):
    assert list(compile_streaming(qre_heart_rate(window)).outputs([1] * 10)) == [1.0] * 10


def test_heart_rate_alternating():
    assert list(compile_streaming(qre_heart_rate(2)).outputs([1, 0, 1, 0])) == [1.0, 0.5, 0.5, 0.5]
    assert list(compile_streaming(qre_heart_rate(4)).outputs([1, 0, 0])) == [1.0, 0.5, pytest.approx(1 / 3)]


def test_stability():
    assert list(compile_streaming(qre_stability(3)).outputs([1, 1, 1])) == [0.0, 0.0, 0.0]
    assert list(compile_streaming(qre_stability(2)).outputs([0, 1, 0, 1]))[1:] == [0.5, 0.5, 0.5]


def test_sliding_moment_identity():
    rng = random.Random(2)
    xs = [rng.uniform(-3, 3) for _ in range(200)]
    R = value_schema("real")
    last = qre_last_value(R)
    sq = lambda: lift(anything(R), 0.0, "real")
    last_sq = make_split("right", sq(), make_basic(TRUE, Call("square", FieldRef("v")), R))
    mean = compile_streaming(make_stream_compose(last, qre_sliding(10, "mean")))
    std = compile_streaming(make_stream_compose(qre_last_value(R), qre_sliding(10, "std")))
    mean_sq = compile_streaming(make_stream_compose(last_sq, qre_sliding(10, "mean")))
    for x in xs:
        m, s, q = mean.step(x).output(), std.step(x).output(), mean_sq.step(x).output()
        assert s * s + m * m == pytest.approx(q, abs=1e-9)


def test_sliding_validation():
    with pytest.raises(ValueError):
        qre_sliding(0)
    with pytest.raises(ValueError):
        qre_sliding(3, "median")


def test_heart_rate_with_producer():
    # producer: 1 on beat items, 0 otherwise, as the latest value
    producer = qre_last_value()
    assert math.isclose(run(qre_heart_rate(4, producer), [1, 1, 0, 0, 0, 0]), 0.0)


@pytest.mark.parametrize("a,b,want", [(1.2, 1.0, True), (1.0, 1.0, True), (0.9, 1.0, False)])
def test_rate_compare(a, b, want):
    R = value_schema("real")
    fa = make_basic(TRUE, a, R)
    fb = make_basic(TRUE, b, R)
    assert eval_reference(qre_rate_compare(fa, fb), [0.0]) is want


def test_rate_compare_on_streams():
    ventricle, atrium = qre_heart_rate(4), qre_heart_rate(4)
    # both read the same marker stream; equal rates compare as true
    q = qre_rate_compare(ventricle, atrium)
    for w in itertools.product((0, 1), repeat=5):
        assert run(q, list(w)) is True
