import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import factorizations, matches, splits
from qrekit.symbolic import (
    TRUE,
    Concat,
    RegexError,
    Schema,
    SchemaError,
    Star,
    Union,
    anything,
    atom,
    check_disjoint,
    check_unamb_concat,
    check_unamb_iter,
    compile_automaton,
    compute_minterms,
    concat,
    eps,
    language_equal,
    pred_eval,
    pred_sat,
    re_matches,
    repeat_range,
    satisfying_item,
    star,
    union,
    unique_factorization,
    unique_split,
    var,
)

S = Schema.single("v", "real")
v = var("v")
LT1 = atom(v < 1, S)
GE1 = atom(v >= 1, S)


# predicates


def test_pred_eval_examples():
    assert pred_eval(v < 1, 0.5, S)
    assert pred_eval(TRUE, 123.0, S)
    assert pred_eval((v <= 1) | (v >= 1), 1.0, S)


def test_pred_eval_on_record_schema():
    R = Schema.record("t", "m")
    assert pred_eval((var("m") > 2) & (var("t") <= 0), {"t": 0.0, "m": 3.0}, R)


def test_pred_eval_schema_mismatch():
    with pytest.raises(SchemaError):
        pred_eval(v < 1, {"v": 0.5}, S)
    with pytest.raises(SchemaError):
        pred_eval(var("w") < 1, 0.5, S)


def test_pred_sat():
    assert not pred_sat((v < 1) & (v > 2), S)
    assert pred_sat(v < 1, S)
    assert not pred_sat(~((v <= 1) | (v > 1)), S)


def test_integer_intervals_are_tight():
    I = Schema.single("v", "integer")
    assert not pred_sat((var("v") > 1) & (var("v") < 2), I)
    assert pred_sat((var("v") > 1) & (var("v") <= 2), I)


@pytest.mark.parametrize(
    "p",
    [(v < 1) & (v > -3), ~(v.eq(2)) & (v >= 2) & (v <= 2), (v < 0) | (v > 5), ~TRUE],
)
def test_satisfying_item_agrees_with_sat(p):
    item = satisfying_item(p, S)
    if pred_sat(p, S):
        assert pred_eval(p, item, S)
    else:
        assert item is None


def test_minterm_counts():
    assert len(compute_minterms([v < 1], S).cells) == 2
    assert len(compute_minterms([], S).cells) == 1
    cells = compute_minterms([v < 1, v < 2], S).cells
    assert len(cells) == 3
    for c in cells:
        assert pred_eval(c.predicate, c.witness, S)


def test_minterms_partition_the_line():
    cells = compute_minterms([v < 1, v >= 0, v.eq(3)], S).cells
    for x in [-2.0, 0.0, 0.5, 1.0, 2.9, 3.0, 7.0]:
        assert sum(pred_eval(c.predicate, x, S) for c in cells) == 1


# regexes and automata


def test_re_matches_examples():
    r = concat(star(atom(v <= 1, S)), atom(v >= 2, S))
    assert re_matches(eps(S), [])
    assert re_matches(r, [0.5, 0.7, 3.0])
    assert not re_matches(r, [3.0, 0.5])


def test_automaton_shapes():
    d = compile_automaton(atom(TRUE, S))
    assert sum(d.live) == 2
    assert [d.accepting[s] for s in range(len(d.live)) if d.live[s]].count(True) == 1
    d = compile_automaton(star(LT1))
    assert sum(d.live) == 1 and d.accepting[0]


def test_disjoint_examples():
    assert check_disjoint(LT1, GE1)
    assert not check_disjoint(star(LT1), star(atom(v < 2, S)))


def test_concat_examples():
    assert check_unamb_concat(LT1, GE1)
    T = anything(S)
    assert not check_unamb_concat(T, T)
    assert check_unamb_concat(concat(star(LT1), GE1), star(LT1))


def test_iter_examples():
    assert check_unamb_iter(LT1)
    assert not check_unamb_iter(anything(S))
    assert not check_unamb_iter(Union(concat(LT1, LT1), LT1, check=False))


def test_constructors_reject_ambiguity():
    with pytest.raises(RegexError):
        union(star(LT1), eps(S))
    with pytest.raises(RegexError):
        concat(anything(S), anything(S))
    with pytest.raises(RegexError):
        star(Union(concat(LT1, LT1), LT1, check=False))


def test_unique_split_examples():
    assert unique_split(LT1, GE1, [0.2, 5.0]) == 1
    assert unique_split(LT1, GE1, [5.0, 0.2]) is None
    assert unique_split(concat(star(LT1), GE1), star(LT1), [0.1, 2.0, 0.3, 0.4]) == 2
    with pytest.raises(RegexError):
        unique_split(anything(S), anything(S), [1.0])


def test_unique_factorization_examples():
    assert unique_factorization(concat(LT1, GE1), [0.1, 2, 0.2, 3]) == [(0, 2), (2, 4)]
    assert unique_factorization(concat(LT1, GE1), []) == []
    assert unique_factorization(concat(LT1, GE1), [0.1, 0.2]) is None


def test_repeat_range_language():
    r = repeat_range(LT1, 1, 3)
    for k in range(6):
        assert re_matches(r, [0.0] * k) == (1 <= k <= 3)


def test_language_equal():
    assert language_equal(star(LT1), Union(eps(S), concat(LT1, star(LT1)), check=False))
    assert not language_equal(star(LT1), star(GE1))


# generated regexes against the backtracking oracle

ATOMS = [LT1, GE1, atom(v <= 0, S), atom(TRUE, S)]


def regexes():
    leaf = st.sampled_from(ATOMS + [eps(S)])

    def extend(children):
        return st.one_of(
            st.tuples(children, children).map(lambda p: Union(*p, check=False)),
            st.tuples(children, children).map(lambda p: Concat(*p, check=False)),
            children.map(lambda r: Star(r, check=False)),
        )

    return st.recursive(leaf, extend, max_leaves=6)


words = st.lists(st.sampled_from([-1.0, 0.0, 0.5, 1.0, 2.0]), max_size=5)


@settings(max_examples=300, deadline=None)
@given(regexes(), words)
def test_matcher_vs_backtracking(r, w):
    assert re_matches(r, w) == matches(r, w)


@settings(max_examples=200, deadline=None)
@given(regexes(), regexes(), words)
def test_unique_split_vs_enumeration(r1, r2, w):
    if not check_unamb_concat(r1, r2):
        return
    found = splits(r1, r2, w)
    assert len(found) <= 1
    assert unique_split(r1, r2, w) == (found[0] if found else None)


@settings(max_examples=200, deadline=None)
@given(regexes(), words)
def test_unique_factorization_vs_enumeration(r, w):
    if not check_unamb_iter(r):
        return
    found = factorizations(r, w)
    assert len(found) <= 1
    assert unique_factorization(r, w) == (found[0] if found else None)


def test_star_of_enum_field():
    C = Schema.single("c", "enum", ("0", "A", "V"))
    r = concat(atom(var("c").eq("V"), C), star(atom(var("c").eq("0"), C)))
    for w in itertools.product("0AV", repeat=3):
        assert re_matches(r, list(w)) == (w[0] == "V" and set(w[1:]) <= {"0"})
