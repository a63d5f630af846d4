"""Denotational evaluator: structural recursion over the expression tree.

Slow but obviously faithful; the streaming evaluator is tested against it.
"""
from __future__ import annotations

from typing import Any, Mapping, Sequence

from .costs import BOTTOM, apply
from .qre import Basic, Compose, CostOp, Else, Eps, Iter, QreExpr, Split, Subst
from .symbolic import unique_factorization, unique_split

__all__ = ["eval_reference", "ReferenceEvaluator", "MissingParameter"]


class MissingParameter(KeyError):
    pass


def _check_valuation(f: QreExpr, valuation: Mapping) -> None:
    missing = [p for p in f.params if p not in valuation]
    if missing:
        raise MissingParameter(f"valuation lacks parameters {missing}")


class ReferenceEvaluator:
    """Memoising reference evaluator for one expression.

    The memo is keyed by node identity, the input word and the valuation, so
    evaluating many prefixes of one stream shares work.
    """

    def __init__(self, f: QreExpr):
        self.f = f
        self._memo: dict = {}

    def __call__(self, w: Sequence[Any], valuation: Mapping | None = None):
        valuation = dict(valuation or {})
        _check_valuation(self.f, valuation)
        return self._eval(self.f, tuple(w), valuation)

    def _key(self, node, w, v):
        try:
            key = (id(node), w, tuple(sorted((k, v[k]) for k in node.params)))
            hash(key)
            return key
        except TypeError:
            return None

    def _eval(self, node: QreExpr, w: tuple, v: dict):
        key = self._key(node, w, v)
        if key is not None:
            hit = self._memo.get(key, self)
            if hit is not self:
                return hit
        out = self._compute(node, w, v)
        if key is not None:
            self._memo[key] = out
        return out

    def _compute(self, node, w, v):
        if isinstance(node, Basic):
            if len(w) == 1 and node.test(w[0]):
                return node.eval_fn(w[0], v)
            return BOTTOM
        if isinstance(node, Eps):
            return node.eval_fn(None, v) if not w else BOTTOM
        if isinstance(node, CostOp):
            vals = []
            for c in node.children:
                x = self._eval(c, w, v)
                if x is BOTTOM:
                    return BOTTOM
                vals.append(x)
            return apply(node.op, vals)
        if isinstance(node, Subst):
            gv = self._eval(node.g, w, v)
            if gv is BOTTOM:
                return BOTTOM
            v2 = dict(v)
            v2[node.x] = gv
            return self._eval(node.f, w, v2)
        if isinstance(node, Else):
            x = self._eval(node.f, w, v)
            return x if x is not BOTTOM else self._eval(node.g, w, v)
        if isinstance(node, Split):
            k = unique_split(node.f.regex, node.g.regex, w)
            if k is None:
                return BOTTOM
            a = self._eval(node.f, w[:k], v)
            b = self._eval(node.g, w[k:], v)
            if a is BOTTOM or b is BOTTOM:
                return BOTTOM
            return apply(node.op, (a, b))
        if isinstance(node, Iter):
            blocks = unique_factorization(node.f.regex, w)
            if blocks is None:
                return BOTTOM
            acc = node.init if node.init is not BOTTOM else v[node.p]
            v2 = dict(v)
            for i, j in blocks:
                v2[node.p] = acc
                acc = self._eval(node.f, w[i:j], v2)
                if acc is BOTTOM:
                    return BOTTOM
            return acc
        if isinstance(node, Compose):
            emitted = []
            for i in range(1, len(w) + 1):
                x = self._eval(node.f, w[:i], {})
                if x is not BOTTOM:
                    emitted.append(x)
            return self._eval(node.g, tuple(emitted), v)
        raise TypeError(f"unknown node {node!r}")


def eval_reference(f: QreExpr, w: Sequence[Any], valuation: Mapping | None = None):
    """``⟦f⟧(w, valuation)``, or ``BOTTOM``."""
    return ReferenceEvaluator(f)(w, valuation)
