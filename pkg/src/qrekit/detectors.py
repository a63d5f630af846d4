"""Peak detectors built from QREs.

Three detectors are provided:

* WPM traces maxima lines of the spectrogram from scale ``s̄`` down to the
  smallest scale, chaining per-scale maxima with ``conn_δ``.
* WPB keeps the scale-``s̄`` maxima that are not inside the blanking window
  of an earlier reported maximum.
* MDT runs the threshold automaton over the rectified signal.

Each detector has two engines: ``"qre"`` evaluates the QRE with the
streaming evaluator, ``"fast"`` computes the same sets with the compiled
kernels.  The test-suite checks that both agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .costs import EMPTY_TIMES, BOTTOM, Operation, REGISTRY, TimeSet, local_max3
from .qre import (
    Call,
    FieldRef,
    ParamRef,
    QreExpr,
    lift,
    make_basic,
    make_cost_op,
    make_else,
    make_iter,
    make_split,
    make_stream_compose,
    value_schema,
)
from .streaming import compile_streaming
from .symbolic import TRUE, Field, Schema, anything, atom, concat, repeat, star, union, var
from .wavelet import Signal, Spectrogram, column_stream

__all__ = [
    "SPECTROGRAM_SCHEMA",
    "WpmParams",
    "WpbParams",
    "MdtParams",
    "MdtState",
    "PeakAnnotation",
    "MdtResult",
    "conn_delta",
    "qre_select_coef",
    "qre_repeat_select_coef",
    "qre_local_max",
    "qre_one_max",
    "qre_union_times",
    "qre_peak_times",
    "qre_peak_wpm",
    "qre_one_bl",
    "qre_latest_peak",
    "qre_peak_wpb",
    "qre_mdt",
    "mdt_thev",
    "boundary_guard",
    "detect_wpm",
    "detect_wpb",
    "detect_mdt",
    "write_annotation",
]

SPECTROGRAM_SCHEMA = Schema.record(Field("s"), Field("t"), Field("w"))
MARKERS = value_schema("integer")
SAMPLES = Schema.single("v", "real")


# ---------------------------------------------------------------------------
# parameters and results


def _positive(name, x):
    if not (isinstance(x, (int, float)) and x > 0 and math.isfinite(x)):
        raise ValueError(f"{name} must be a positive number, got {x!r}")


@dataclass(frozen=True)
class WpmParams:
    sbar: float
    pbar: float
    eps: float = 1.0
    delta: int = 2

    def __post_init__(self):
        _positive("sbar", self.sbar)
        _positive("pbar", self.pbar)
        _positive("eps", self.eps)
        if int(self.delta) != self.delta or self.delta < 0:
            raise ValueError(f"delta must be a nonnegative integer number of samples, got {self.delta!r}")


@dataclass(frozen=True)
class WpbParams:
    sbar: float
    pbar: float
    bl: int = 150

    def __post_init__(self):
        _positive("sbar", self.sbar)
        _positive("pbar", self.pbar)
        if int(self.bl) != self.bl or self.bl < 1:
            raise ValueError(f"blanking length must be an integer >= 1, got {self.bl!r}")


@dataclass(frozen=True)
class MdtParams:
    bl: int = 150
    decay: float = math.log(2.0) / 300.0
    pmin: float = 20.0
    p0: float = 200.0

    def __post_init__(self):
        if int(self.bl) != self.bl or self.bl < 1:
            raise ValueError(f"blanking length must be an integer >= 1, got {self.bl!r}")
        _positive("decay", self.decay)
        _positive("pmin", self.pmin)
        _positive("p0", self.p0)
        if self.pmin > self.p0:
            raise ValueError(f"minimum threshold {self.pmin} exceeds initial threshold {self.p0}")


@dataclass(frozen=True)
class PeakAnnotation:
    """Sorted peak sample indices with their times."""

    indices: tuple
    times: tuple
    detector: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("peak indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))

    @classmethod
    def from_indices(cls, indices, times: np.ndarray, detector: str, params: dict) -> "PeakAnnotation":
        idx = sorted(int(i) for i in indices)
        return cls(tuple(idx), tuple(float(times[i]) for i in idx), detector, dict(params))

    def __len__(self):
        return len(self.indices)


def write_annotation(ann: PeakAnnotation, fh, comments: Sequence[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write("index,time,detector\n")
    for i, t in zip(ann.indices, ann.times):
        fh.write(f"{i},{t:.12g},{ann.detector}\n")


# ---------------------------------------------------------------------------
# conn_δ


def conn_delta(sets: Sequence, delta) -> frozenset:
    """Keep the times of the last set reachable from the first through all sets.

    ``conn(X, Y) = {y ∈ Y : ∃x ∈ X, |x − y| ≤ δ}``, folded left to right.
    """
    if not sets:
        raise ValueError("conn_delta needs at least one set")
    cur = np.array(sorted(set(sets[0])), dtype=np.int64)
    for nxt in sets[1:]:
        ys = np.array(sorted(set(nxt)), dtype=np.int64)
        cur = kernels.conn_pair(cur, ys, int(delta))
    return frozenset(int(x) for x in cur)


# ---------------------------------------------------------------------------
# WPM / WPB expressions


def _any(schema):
    return atom(TRUE, schema)


def _skip(schema, k: int):
    """Constant QRE matching exactly ``k`` items."""
    return lift(repeat(_any(schema), k), 0, "integer")


def qre_select_coef(i: int, n: int, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    """Matches one column ``d_n … d_1`` and returns the magnitude of ``d_i``."""
    if not 1 <= i <= n:
        raise ValueError(f"scale index {i} outside 1..{n}")
    pick = make_basic(TRUE, FieldRef("w"), schema)
    body = make_split("left", pick, _skip(schema, i - 1))
    return make_split("right", _skip(schema, n - i), body)


def qre_repeat_select_coef(i: int, n: int, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    columns = lift(star(repeat(_any(schema), n)), 0, "integer")
    return make_split("right", columns, qre_select_coef(i, n, schema))


def qre_local_max(threshold: float) -> QreExpr:
    """On ``r_1 … r_k`` (k ≥ 3): 1 if ``r_{k−1}`` is a strict local maximum above ``threshold``, else 0."""
    S = value_schema("real")
    v = lambda: make_basic(TRUE, FieldRef("v"), S)
    lm3 = make_split(local_max3(threshold), v(), make_split("pair", v(), v()))
    return make_split("right", lift(anything(S), 0, "integer"), lm3)


def qre_one_max(i: int, n: int, threshold: float, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    return make_stream_compose(qre_repeat_select_coef(i, n, schema), qre_local_max(threshold))


def _times_tick(state):
    n, s = state
    return (n + 1, s)


def _times_mark(state):
    n, s = state
    return (n + 1, s.insert(n + 1))


TIMES_TICK = REGISTRY.register(Operation("times-tick", _times_tick, 1, ("tuple",), "tuple"))
TIMES_MARK = REGISTRY.register(Operation("times-mark", _times_mark, 1, ("tuple",), "tuple"))


def qre_union_times() -> QreExpr:
    """Set of (1-based) positions of the 1s in a marker stream."""
    one = var("v").eq(1)
    acc = ParamRef("m", "tuple")
    step = make_else(
        make_basic(one, Call(TIMES_MARK, acc), MARKERS),
        make_basic(~one, Call(TIMES_TICK, acc), MARKERS),
    )
    counted = make_iter("m", step, init=(0, EMPTY_TIMES))
    return make_cost_op("second", [counted])


def qre_peak_times(i: int, n: int, threshold: float, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    """Positions of the scale-``s_i`` maxima, one marker per column.

    Nested as ``repeatSelectCoef ≫ (localMax ≫ unionTimes)``: a composition
    re-emits its current value after every input item, so the left-nested
    ``(repeatSelectCoef ≫ localMax) ≫ unionTimes`` would see each column's
    marker once per item of the column rather than once.
    """
    markers = make_stream_compose(qre_local_max(threshold), qre_union_times())
    return make_stream_compose(qre_repeat_select_coef(i, n, schema), markers)


def _conn_op(delta: int) -> Operation:
    def run(*sets):
        return TimeSet.from_iterable(conn_delta(list(sets), delta))

    return Operation(f"conn[{delta}]", run, None, None, "iset")


def qre_peak_wpm(sigma: int, pbar: float, delta: int, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    """``conn_δ(peakTimes_σ, …, peakTimes_1)`` over columns of height ``σ``.

    Only scale ``s_σ`` is thresholded; lower scales use threshold 0.
    """
    parts = [qre_peak_times(i, sigma, pbar if i == sigma else 0.0, schema) for i in range(sigma, 0, -1)]
    return make_cost_op(_conn_op(int(delta)), parts)


def qre_one_bl(bl: int):
    """``1·(0|1)^BL·0*`` over the marker alphabet."""
    one = atom(var("v").eq(1), MARKERS)
    zero = atom(~var("v").eq(1), MARKERS)
    return concat(concat(one, repeat(union(zero, one), bl)), star(zero))


def qre_latest_peak(bl: int) -> QreExpr:
    """1 at a marker that starts a new blanking period, undefined elsewhere."""
    zero = atom(~var("v").eq(1), MARKERS)
    settled = concat(star(zero), star(qre_one_bl(bl)))
    new_peak = make_basic(var("v").eq(1), 1, MARKERS)
    return make_split("right", lift(settled, 0, "integer"), new_peak)


def qre_peak_wpb(sigma: int, pbar: float, bl: int, schema: Schema = SPECTROGRAM_SCHEMA) -> QreExpr:
    """``repeatSelectCoef_σ ≫ (localMax_σ ≫ latestPeak)``; nested as in :func:`qre_peak_times`."""
    markers = make_stream_compose(qre_local_max(pbar), qre_latest_peak(bl))
    return make_stream_compose(qre_repeat_select_coef(sigma, sigma, schema), markers)


# ---------------------------------------------------------------------------
# MDT


class MdtState(NamedTuple):
    threshold: float
    blanking: bool
    counter: int
    ymax: float
    tmax: int
    t: int  # index of the next sample
    flag: bool  # the last sample started a blanking period


def mdt_initial(params: MdtParams) -> MdtState:
    return MdtState(float(params.p0), False, 0, 0.0, 0, 0, False)


def mdt_thev(state: MdtState, y: float, params: MdtParams) -> MdtState:
    """One step of the threshold automaton on rectified sample ``y``."""
    p, blanking, counter, ym, tm, t, _ = state
    lam, pmin, bl = params.decay, params.pmin, params.bl
    if blanking:
        counter += 1
        if y > ym:
            ym, tm = y, t
        if counter == bl:
            blanking = False
            p = 0.75 * ym * math.exp(-lam * float(t + 1 - tm - bl))
            if p < pmin:
                p = pmin
        return MdtState(p, blanking, counter, ym, tm, t + 1, False)
    if y > p:
        return MdtState(p, True, 0, y, t, t + 1, True)
    p = p * math.exp(-lam)
    if p < pmin:
        p = pmin
    return MdtState(p, False, counter, ym, tm, t + 1, False)


def thev_op(params: MdtParams) -> Operation:
    def run(state, y):
        return mdt_thev(state, y, params)

    return Operation("ThEv", run, 2, ("tuple", "real"), "tuple")


def qre_mdt(params: MdtParams) -> QreExpr:
    """``iter-ThEv(d ∈ ℝ ? |d|)`` seeded with the initial threshold state."""
    body = make_basic(TRUE, Call(thev_op(params), ParamRef("st", "tuple"), Call("abs", FieldRef("v"))), SAMPLES)
    return make_iter("st", body, init=mdt_initial(params))


@dataclass(frozen=True)
class MdtResult:
    annotation: PeakAnnotation
    trace: np.ndarray  # threshold in force at each sample, NaN while blanking


# ---------------------------------------------------------------------------
# drivers


def boundary_guard(sp_or_len, sbar: float, sigma: float, dt: float) -> int:
    """Number of samples at each end where maxima are ignored: ``⌈6·s̄·σ / Δt⌉``."""
    return int(math.ceil(6.0 * sbar * sigma / dt - 1e-9))


def _guarded(indices, m: int, guard: int):
    return [i for i in indices if guard <= i < m - guard]


def _sigma_index(sp: Spectrogram, sbar: float) -> int:
    try:
        return sp.grid.index(sbar) + 1
    except ValueError:
        raise ValueError(f"sbar={sbar} is not a scale of the grid {sp.grid.scales[0]}..{sp.grid.scales[-1]}") from None


def _dt(sp: Spectrogram) -> float:
    t = sp.times
    return float((t[-1] - t[0]) / (len(t) - 1)) if len(t) > 1 else 1e-3


def wpm_scale_maxima(sp: Spectrogram, sigma: int, pbar: float) -> list:
    """Per-scale strict maxima from ``s_σ`` down to ``s_1`` (column indices)."""
    out = []
    for i in range(sigma, 0, -1):
        row = np.ascontiguousarray(sp.magnitude[i - 1])
        out.append(kernels.strict_local_maxima(row, pbar if i == sigma else 0.0))
    return out


def _run_qre_columns(expr: QreExpr, sp: Spectrogram, sigma: int):
    ev = compile_streaming(expr, validate=False)
    for d in column_stream(sp.restrict(sigma)):
        ev.step(d)
    return ev


def detect_wpm(sp: Spectrogram, params: WpmParams, *, engine: str = "fast", wavelet_sigma: float = 1e-3) -> PeakAnnotation:
    sigma = _sigma_index(sp, params.sbar)
    step = max((b - a for a, b in zip(sp.grid.scales[:sigma], sp.grid.scales[1:sigma])), default=0.0)
    if step > params.eps:
        raise ValueError(f"eps={params.eps} is smaller than the grid step {step} below sbar")
    m = sp.shape[1]
    if engine == "fast":
        sets = wpm_scale_maxima(sp, sigma, params.pbar)
        found = conn_delta([s.tolist() for s in sets], params.delta)
    elif engine == "qre":
        ev = _run_qre_columns(qre_peak_wpm(sigma, params.pbar, params.delta), sp, sigma)
        res = ev.output()
        # marker k (1-based) reports the middle of columns k..k+2, i.e. 0-based column k
        found = set() if res is BOTTOM else set(res)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    guard = boundary_guard(sp, params.sbar, wavelet_sigma, _dt(sp))
    idx = _guarded(sorted(found), m, guard)
    return PeakAnnotation.from_indices(idx, sp.times, "wpm", _asdict(params))


def detect_wpb(sp: Spectrogram, params: WpbParams, *, engine: str = "fast", wavelet_sigma: float = 1e-3) -> PeakAnnotation:
    sigma = _sigma_index(sp, params.sbar)
    m = sp.shape[1]
    if engine == "fast":
        (cands,) = wpm_scale_maxima(sp, sigma, params.pbar)[:1]
        found, last = [], None
        for k in cands.tolist():
            if last is None or k - last > params.bl:
                found.append(k)
                last = k
    elif engine == "qre":
        found = _wpb_qre(sp, sigma, params)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    guard = boundary_guard(sp, params.sbar, wavelet_sigma, _dt(sp))
    return PeakAnnotation.from_indices(_guarded(found, m, guard), sp.times, "wpb", _asdict(params))


def _wpb_qre(sp: Spectrogram, sigma: int, params: WpbParams, counter: list | None = None) -> list:
    ev = compile_streaming(qre_peak_wpb(sigma, params.pbar, params.bl), validate=False)
    found = []
    items = column_stream(sp.restrict(sigma))
    for col in range(sp.shape[1]):
        for _ in range(sigma):
            ev.step(next(items))
        if col >= 2 and ev.output() == 1:
            # emission number col-1 (1-based) flags 0-based column col-1
            found.append(col - 1)
        if counter is not None:
            counter.append(ev.activations)
    return found


def detect_mdt(x: Signal, params: MdtParams = MdtParams(), *, engine: str = "fast") -> MdtResult:
    y = np.abs(np.ascontiguousarray(x.values, dtype=np.float64))
    if engine == "fast":
        peaks, trace = kernels.mdt_run(y, float(params.p0), int(params.bl), float(params.decay), float(params.pmin))
        idx = peaks.tolist()
    elif engine == "qre":
        ev = compile_streaming(qre_mdt(params), validate=False)
        idx = []
        trace = np.empty(len(y))
        state = mdt_initial(params)
        for t, v in enumerate(x.values.tolist()):
            trace[t] = math.nan if state.blanking else state.threshold
            ev.step(v)
            state = ev.output()
            if state.flag:
                idx.append(t)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return MdtResult(PeakAnnotation.from_indices(idx, x.times, "mdt", _asdict(params)), trace)


def _asdict(p) -> dict:
    return {k: getattr(p, k) for k in p.__dataclass_fields__}
