"""Predicates, symbolic unambiguous regexes and their decision procedures."""
from .predicates import (
    FALSE,
    TRUE,
    And,
    Cmp,
    Const,
    Field,
    Minterms,
    Not,
    Or,
    Predicate,
    Schema,
    SchemaError,
    compile_predicate,
    compute_minterms,
    pred_eval,
    pred_sat,
    satisfying_item,
    var,
)
from .regex import (
    Atom,
    Concat,
    Epsilon,
    RegexError,
    Star,
    SymbolicRegex,
    Union,
    anything,
    atom,
    concat,
    concat_all,
    eps,
    plus,
    repeat,
    repeat_range,
    star,
    union,
    union_all,
)
from .automata import (
    DFA,
    build_dfa,
    check_disjoint,
    check_unamb_concat,
    check_unamb_iter,
    compile_automaton,
    is_universal,
    language_empty,
    language_equal,
    minterms_for,
    re_matches,
    unique_factorization,
    unique_split,
)

__all__ = [
    "FALSE",
    "TRUE",
    "And",
    "Cmp",
    "Const",
    "Field",
    "Minterms",
    "Not",
    "Or",
    "Predicate",
    "Schema",
    "SchemaError",
    "compile_predicate",
    "compute_minterms",
    "pred_eval",
    "pred_sat",
    "satisfying_item",
    "var",
    "Atom",
    "Concat",
    "Epsilon",
    "RegexError",
    "Star",
    "SymbolicRegex",
    "Union",
    "anything",
    "atom",
    "concat",
    "concat_all",
    "eps",
    "plus",
    "repeat",
    "repeat_range",
    "star",
    "union",
    "union_all",
    "DFA",
    "build_dfa",
    "check_disjoint",
    "check_unamb_concat",
    "check_unamb_iter",
    "compile_automaton",
    "is_universal",
    "language_empty",
    "language_equal",
    "minterms_for",
    "re_matches",
    "unique_factorization",
    "unique_split",
]
