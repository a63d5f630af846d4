"""Streaming evaluation.

Every node compiles to a *plan* holding the node's DFA over a shared minterm
alphabet.  A plan spawns *runners*; a runner tracks the DFA state of the
input consumed since it was started plus whatever values the combinator
needs.  Split and Iter keep one runner ("thread") per candidate split point;
threads whose DFA state can no longer reach acceptance are dropped, and
unambiguity guarantees that two live threads never sit in the same
configuration for long, so the number of threads is bounded by the
automaton sizes and never by the length of the stream.

The items of a composition's second stage are values, not input items, so
each composition opens a new *level* with its own minterms.
"""
from __future__ import annotations

from typing import Any, Iterable, Mapping

from .costs import BOTTOM, Param, Term, apply, substitute
from .qre import NOTCONST, Basic, Compose, CostOp, Else, Eps, Iter, QreExpr, Split, Subst
from .symbolic import build_dfa, minterms_for

__all__ = ["StreamEvaluator", "compile_streaming", "step", "output"]


class _Level:
    def __init__(self, root: QreExpr):
        regexes = []
        stack = [root]
        while stack:
            n = stack.pop()
            if n.regex is not None:
                regexes.append(n.regex)
            if isinstance(n, Compose):
                stack.append(n.f)  # n.g opens its own level
            else:
                stack.extend(n.children)
        if not regexes:
            # only opaque compositions on this level; any alphabet works
            from .symbolic import anything

            regexes.append(anything(root.schema))
        self.minterms = minterms_for(root.schema, *regexes)
        self.classify = self.minterms.classify


class _Plan:
    __slots__ = ("node", "delta", "acc", "live", "kids", "level", "counter", "make")

    def __init__(self, node: QreExpr, level: _Level, counter: list):
        self.node = node
        self.level = level
        self.counter = counter
        if node.regex is not None:
            d = build_dfa(node.regex, level.minterms)
            self.delta, self.acc, self.live = d.delta, d.accepting, d.live
        else:
            self.delta = self.acc = self.live = None
        if node.const is not NOTCONST and not isinstance(node, Compose):
            self.kids = ()
            self.make = _ConstRunner
            return
        if isinstance(node, Compose):
            self.kids = (_Plan(node.f, level, counter), _Plan(node.g, _Level(node.g), counter))
        else:
            self.kids = tuple(_Plan(c, level, counter) for c in node.children)
        self.make = _RUNNERS[type(node)]

    def start(self, env):
        return self.make(self, env)


class _Runner:
    __slots__ = ("plan", "env", "s")

    def __init__(self, plan, env):
        self.plan = plan
        self.env = env
        self.s = 0

    def alive(self) -> bool:
        return self.plan.live[self.s]


class _ConstRunner(_Runner):
    __slots__ = ()

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]

    def out(self):
        p = self.plan
        return p.node.const if p.acc[self.s] else BOTTOM


class _BasicRunner(_Runner):
    __slots__ = ("val",)

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.val = BOTTOM

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        s = self.s = p.delta[self.s][c]
        self.val = p.node.eval_fn(item, self.env) if p.acc[s] else BOTTOM

    def out(self):
        return self.val


class _EpsRunner(_Runner):
    __slots__ = ("val",)

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.val = plan.node.eval_fn(None, env)

    def step(self, item, c):
        self.plan.counter[0] += 1
        self.s = self.plan.delta[self.s][c]
        self.val = BOTTOM

    def out(self):
        return self.val


class _OpRunner(_Runner):
    __slots__ = ("kids",)

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.kids = [k.start(env) for k in plan.kids]

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]
        for k in self.kids:
            k.step(item, c)

    def out(self):
        if not self.plan.acc[self.s]:
            return BOTTOM
        vals = []
        for k in self.kids:
            v = k.out()
            if v is BOTTOM:
                return BOTTOM
            vals.append(v)
        return apply(self.plan.node.op, vals)


class _SubstRunner(_Runner):
    __slots__ = ("f", "g")

    def __init__(self, plan, env):
        super().__init__(plan, env)
        x = plan.node.x
        fenv = dict(env)
        fenv[x] = Param(x)
        self.f = plan.kids[0].start(fenv)
        self.g = plan.kids[1].start(env)

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]
        self.f.step(item, c)
        self.g.step(item, c)

    def out(self):
        if not self.plan.acc[self.s]:
            return BOTTOM
        gv = self.g.out()
        if gv is BOTTOM:
            return BOTTOM
        fv = self.f.out()
        if fv is BOTTOM:
            return BOTTOM
        if isinstance(fv, Term):
            return substitute(fv, self.plan.node.x, gv)
        return fv


class _ElseRunner(_Runner):
    __slots__ = ("f", "g")

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.f = plan.kids[0].start(env)
        self.g = plan.kids[1].start(env)

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]
        if self.f is not None:
            self.f.step(item, c)
            if not self.f.alive():
                self.f = None
        if self.g is not None:
            self.g.step(item, c)
            if not self.g.alive():
                self.g = None

    def out(self):
        if self.f is not None:
            v = self.f.out()
            if v is not BOTTOM:
                return v
        if self.g is not None:
            return self.g.out()
        return BOTTOM


class _SplitRunner(_Runner):
    __slots__ = ("f", "threads")

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.f = plan.kids[0].start(env)
        self.threads = []
        self._spawn()

    def _spawn(self):
        f = self.f
        if f is not None:
            fv = f.out()
            if fv is not BOTTOM:
                self.threads.append((self.plan.kids[1].start(self.env), fv))

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]
        f = self.f
        if f is not None:
            f.step(item, c)
            if not f.alive():
                self.f = None
        if self.threads:
            keep = []
            for t in self.threads:
                t[0].step(item, c)
                if t[0].alive():
                    keep.append(t)
            self.threads = keep
        self._spawn()

    def out(self):
        if not self.plan.acc[self.s]:
            return BOTTOM
        for g, fv in self.threads:
            gv = g.out()
            if gv is not BOTTOM:
                return apply(self.plan.node.op, (fv, gv))
        return BOTTOM


class _IterRunner(_Runner):
    __slots__ = ("threads", "cur")

    def __init__(self, plan, env):
        super().__init__(plan, env)
        node = plan.node
        seed = node.init if node.init is not BOTTOM else env[node.p]
        self.cur = seed
        self.threads = [self._block(seed)]

    def _block(self, acc):
        env = dict(self.env)
        env[self.plan.node.p] = acc
        return self.plan.kids[0].start(env)

    def step(self, item, c):
        p = self.plan
        p.counter[0] += 1
        self.s = p.delta[self.s][c]
        keep = []
        done = BOTTOM
        for t in self.threads:
            t.step(item, c)
            if done is BOTTOM:
                v = t.out()
                if v is not BOTTOM:
                    done = v
            if t.alive():
                keep.append(t)
        if done is not BOTTOM and p.acc[self.s]:
            keep.append(self._block(done))
        else:
            done = BOTTOM
        self.threads = keep
        self.cur = done

    def out(self):
        return self.cur


class _ComposeRunner(_Runner):
    __slots__ = ("f", "g", "classify_g")

    def __init__(self, plan, env):
        super().__init__(plan, env)
        self.f = plan.kids[0].start({})
        self.g = plan.kids[1].start(env)
        self.classify_g = plan.kids[1].level.classify

    def alive(self):
        return True

    def step(self, item, c):
        self.plan.counter[0] += 1
        f = self.f
        if f is None:
            return
        f.step(item, c)
        v = f.out()
        if v is not BOTTOM:
            self.g.step(v, self.classify_g(v))
        if not f.alive():
            self.f = None

    def out(self):
        return self.g.out()


_RUNNERS = {
    Basic: _BasicRunner,
    Eps: _EpsRunner,
    CostOp: _OpRunner,
    Subst: _SubstRunner,
    Else: _ElseRunner,
    Split: _SplitRunner,
    Iter: _IterRunner,
    Compose: _ComposeRunner,
}


class StreamEvaluator:
    """Incremental evaluator of one expression under one valuation.

    ``step`` consumes one item in place; ``output`` is the value on the
    prefix consumed so far.  ``activations`` counts runner steps, a proxy
    for the work done per item.
    """

    def __init__(self, f: QreExpr, valuation: Mapping | None = None, *, validate: bool = True):
        valuation = dict(valuation or {})
        missing = [p for p in f.params if p not in valuation]
        if missing:
            raise KeyError(f"valuation lacks parameters {missing}")
        self.expr = f
        self.validate = validate
        self._counter = [0]
        self._level = _Level(f)
        self._plan = _Plan(f, self._level, self._counter)
        self._root = self._plan.start(valuation)
        self.consumed = 0

    @property
    def activations(self) -> int:
        return self._counter[0]

    def step(self, item) -> "StreamEvaluator":
        if self.validate:
            self.expr.schema.check(item)
        self._root.step(item, self._level.classify(item))
        self.consumed += 1
        return self

    def feed(self, items: Iterable[Any]) -> "StreamEvaluator":
        for d in items:
            self.step(d)
        return self

    def output(self):
        return self._root.out()

    def outputs(self, items: Iterable[Any]):
        """Yield the output after each item."""
        for d in items:
            self.step(d)
            yield self._root.out()


def compile_streaming(f: QreExpr, valuation: Mapping | None = None, *, validate: bool = True) -> StreamEvaluator:
    return StreamEvaluator(f, valuation, validate=validate)


def step(e: StreamEvaluator, item) -> StreamEvaluator:
    return e.step(item)


def output(e: StreamEvaluator):
    return e.output()
