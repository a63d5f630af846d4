from fractions import Fraction

import pytest

from qrekit.costs import (
    BOTTOM,
    EMPTY_TIMES,
    REGISTRY,
    Operation,
    OperationRegistry,
    Param,
    TimeSet,
    apply,
    free_params,
    inc,
    inrange,
    scale_by,
    substitute,
    types_compatible,
)


def test_bottom_is_singleton_and_falsy():
    import pickle

    assert pickle.loads(pickle.dumps(BOTTOM)) is BOTTOM
    assert not BOTTOM


def test_builtin_ops():
    assert REGISTRY["add"](2, 3) == 5
    assert REGISTRY["diff"](2, 3) == -1
    assert REGISTRY["avg"](1, 2, 6) == 3
    assert REGISTRY["sum"](1, 2, 3, 4) == 10
    assert REGISTRY["left"]("a", "b") == "a"
    assert REGISTRY["right"]("a", "b") == "b"
    assert REGISTRY["div"](1, 0) == 0.0


@pytest.mark.parametrize("x,y,want", [(1.2, 1.0, True), (1.0, 1.0, True), (0.9, 1.0, False)])
def test_gt_is_non_strict(x, y, want):
    assert REGISTRY["gt"](x, y) is want


def test_inc_exact():
    op = inc()
    assert op(10, 8) is True
    assert op(10, 10) is False
    assert op(10, Fraction(81, 10)) is False
    assert inc(0.8)(5, 4) is True


def test_inrange_and_scale():
    assert inrange(5, 6)(6) and not inrange(5, 6)(7)
    assert scale_by(Fraction(1, 4))(10) == Fraction(5, 2)


def test_arity_and_types():
    add = REGISTRY["add"]
    with pytest.raises(TypeError):
        add.check(["real"])
    with pytest.raises(TypeError):
        add.check(["real", "tuple"])
    assert add.result_type(["integer", "integer"]) == "integer"
    assert add.result_type(["integer", "real"]) == "real"
    assert types_compatible("integer", "real")
    assert not types_compatible("boolean", "real")


def test_registry():
    reg = OperationRegistry()
    reg.register(Operation("twice", lambda x: 2 * x, 1))
    assert "twice" in reg and reg["twice"](4) == 8
    with pytest.raises(ValueError):
        reg.register(Operation("twice", lambda x: x, 1))
    with pytest.raises(KeyError):
        reg["missing"]
    assert "add" not in reg and "add" in REGISTRY.copy()


def test_symbolic_terms_fold():
    add = REGISTRY["add"]
    t = Param("x")
    for _ in range(100):
        t = apply(add, [t, 1])
    assert repr(t) == "add(x, 100)"
    assert free_params(t) == {"x"}
    assert substitute(t, "x", 5) == 105
    assert substitute(t, "y", 5) == t


def test_timeset():
    s = EMPTY_TIMES.insert(3).insert(1).insert(3)
    assert len(s) == 2 and 1 in s and 2 not in s
    assert list(s) == [1, 3]
    assert s == {1, 3} and s == TimeSet.from_iterable([3, 1])
    assert EMPTY_TIMES.insert(1) != s
    # older versions are untouched by later insertions
    t = s.insert(7)
    assert list(s) == [1, 3] and list(t) == [1, 3, 7]
