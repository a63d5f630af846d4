import pytest

from qrekit.costs import BOTTOM
from qrekit.qre import QreError
from qrekit.reference import eval_reference
from qrekit.streaming import compile_streaming
from qrekit.symbolic import Schema, SchemaError, pred_eval
from qrekit.textformat import (
    ParseError,
    parse_lambda,
    parse_predicate,
    parse_qre,
    parse_qre_syntax,
    string_constants,
)

S = Schema.single("v", "real")
I = Schema.single("v", "integer")
C = Schema.single("c", "enum", ("0", "A", "V"))


def run(text, items, schema=S, **val):
    return eval_reference(parse_qre(text, schema), items, val)


@pytest.mark.parametrize(
    "text,item,want",
    [
        ("v < 1", 0.5, True),
        ("v <= 1 | v >= 1", 1.0, True),
        ("!(v > 2) & v != 0", 0.0, False),
        ("true", -3.0, True),
        ("(v == 2)", 2.0, True),
    ],
)
def test_predicates(text, item, want):
    assert pred_eval(parse_predicate(text, S), item, S) is want


def test_predicate_unknown_field():
    with pytest.raises((SchemaError, QreError)):
        parse_predicate("w < 1", S)


def test_enum_constants():
    p = parse_predicate("c = 'V' | c = \"A\"", C)
    assert pred_eval(p, "A", C) and not pred_eval(p, "0", C)


def test_lambda_arithmetic():
    fn = parse_lambda("-v * 2 + square(v) / 4", S)
    assert eval_reference(parse_qre("basic(true, -v * 2 + square(v) / 4)", S), [2.0]) == -3.0
    assert fn is not None


def test_fold_sugar():
    assert run("iter(p, basic(true, 1))", [0.0] * 5, p=0) == 5
    assert run("iter(p, basic(true, 1))", [], p=7) == 7
    assert run("iter(max, p, basic(true, v))", [1.0, 4.0, 2.0], p=0.0) == 4.0


def test_plain_iteration_and_seed():
    assert run("iter(p, basic(true, p * 2), 1)", [0.0] * 3) == 8
    assert run("iter(p, basic(true, p + v))", [1.0, 2.0], p=10.0) == 13.0


def test_combinators():
    assert run("split(gt, basic(true, v), basic(true, v))", [5.0, 3.0]) is True
    assert run("else(basic(v > 3, 1), basic(v <= 3, 0))", [1.0]) == 0
    assert run("op(add, basic(true, v), basic(true, 2 * v))", [2.0]) == 6.0
    assert run("eps(4)", []) == 4
    assert run("eps(4)", [1.0]) is BOTTOM
    assert run("subst(basic(true, x * v), x, basic(true, v))", [3.0]) == 9.0
    assert run("op(inrange[1,3], iter(p, basic(true, 1), 0))", [0.0] * 3) is True
    assert run("op(scale[2], basic(true, v))", [1.5]) == 3.0


def test_compose_closed():
    text = "compose(iter(p, basic(true, 1), 0), iter(p, basic(true, 1), 0))"
    assert run(text, [1.0, 2.0, 3.0]) == 3


def test_comments_and_whitespace():
    text = """
    # count the items
    iter(p,      # fold seed
         basic(true, 1), 0)
    """
    assert run(text, [0.0, 0.0]) == 2


def test_streaming_on_parsed():
    f = parse_qre("iter(p, else(basic(v > 0, 1), basic(v <= 0, 0)), 0)", I)
    e = compile_streaming(f)
    assert list(e.outputs([1, 0, 5, -2])) == [1, 1, 2, 2]


def test_string_constants():
    node = parse_qre_syntax("basic(c = 'V' & c != 'A', 1)")
    assert string_constants(node) == {"V", "A"}


@pytest.mark.parametrize(
    "text",
    ["basic(true 1)", "iter(p)", "basic(v <, 1)", "split(add, basic(true,1))", "eps(1) extra", ""],
)
def test_syntax_errors(text):
    with pytest.raises(ParseError) as err:
        parse_qre(text, S)
    assert "line" in str(err.value)


def test_error_position():
    with pytest.raises(ParseError) as err:
        parse_qre("iter(p,\n  basic(true, 1) ?)", S)
    assert "line 2" in str(err.value)


def test_semantic_errors():
    with pytest.raises(QreError) as err:
        parse_qre("else(basic(v > 0, 1), basic(v > -1, 2))", S)
    assert err.value.invariant == "disjoint-domains"
    with pytest.raises(QreError) as err:
        parse_qre("op(nosuchop, basic(true, 1))", S)
    assert err.value.invariant == "unknown-operation"
