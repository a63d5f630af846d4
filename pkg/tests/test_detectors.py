import io
import math
import random

import numpy as np
import pytest

from oracles import conn_direct
from qrekit.costs import BOTTOM
from qrekit.detectors import (
    MdtParams,
    PeakAnnotation,
    WpbParams,
    WpmParams,
    boundary_guard,
    conn_delta,
    detect_mdt,
    detect_wpb,
    detect_wpm,
    mdt_initial,
    mdt_thev,
    qre_latest_peak,
    qre_local_max,
    qre_peak_times,
    qre_repeat_select_coef,
    qre_select_coef,
    qre_union_times,
    write_annotation,
)
from qrekit.reference import eval_reference
from qrekit.streaming import compile_streaming
from qrekit.synthetic import SyntheticSpec, generate_synthetic, spike_train_spec
from qrekit.wavelet import ScaleGrid, Signal, Spectrogram, column_stream, cwt


def column(*ws, t=0.0):
    """Items of one column, largest scale first."""
    n = len(ws)
    return [{"s": float(n - k), "t": t, "w": float(w)} for k, w in enumerate(ws)]


def spectrogram(rows):
    rows = np.asarray(rows, dtype=float)
    n, m = rows.shape
    return Spectrogram(rows, ScaleGrid.integers(1, n), 1e-3 * np.arange(m))


def outputs(expr, items):
    e = compile_streaming(expr, validate=False)
    return [e.step(x).output() for x in items]


# building blocks


def test_select_coef():
    assert eval_reference(qre_select_coef(1, 2), column(7, 3)) == 3
    assert eval_reference(qre_select_coef(2, 2), column(7, 3)) == 7
    assert eval_reference(qre_select_coef(2, 3), column(5, 9, 1)) == 9
    assert eval_reference(qre_select_coef(1, 2), column(7)) is BOTTOM
    with pytest.raises(ValueError):
        qre_select_coef(3, 2)


def test_repeat_select_coef():
    f = qre_repeat_select_coef(1, 2)
    assert eval_reference(f, column(7, 3)) == 3
    assert eval_reference(f, column(7, 3) + column(8, 4)) == 4
    assert eval_reference(f, column(7, 3) + column(8)) is BOTTOM


@pytest.mark.parametrize("ws,p,want", [([1, 3, 2], 2, 1), ([1, 3, 2], 5, 0), ([1, 2, 3], 0, 0), ([2, 2, 1], 0, 0)])
def test_local_max(ws, p, want):
    assert eval_reference(qre_local_max(p), [float(w) for w in ws]) == want


def test_local_max_needs_three():
    assert eval_reference(qre_local_max(0), [1.0, 2.0]) is BOTTOM


def test_local_max_looks_at_last_three():
    assert eval_reference(qre_local_max(0), [9.0, 9.0, 1.0, 3.0, 2.0]) == 1


@pytest.mark.parametrize("markers,want", [([0, 1, 0, 0, 1], {2, 5}), ([0, 0, 0], set()), ([1], {1})])
def test_union_times(markers, want):
    assert set(eval_reference(qre_union_times(), markers)) == want


def test_one_max_single_bump():
    rows = [[0, 0, 0, 0, 0], [0, 1, 5, 1, 0]]  # row 0 is the smallest scale
    sp = spectrogram(rows)
    items = list(column_stream(sp))
    assert set(eval_reference(qre_peak_times(2, 2, 2.0), items)) == {2}
    assert set(eval_reference(qre_peak_times(2, 2, 9.0), items)) == set()
    zero = list(column_stream(spectrogram(np.zeros((2, 5)))))
    assert set(eval_reference(qre_peak_times(2, 2, 0.0), zero)) == set()


@pytest.mark.parametrize(
    "markers,bl,want",
    [([1, 0, 0, 1], 2, [1, 4]), ([1, 1], 2, [1]), ([0, 0, 0], 2, []), ([1, 0, 1, 0, 0, 1], 2, [1, 6])],
)
def test_latest_peak(markers, bl, want):
    outs = outputs(qre_latest_peak(bl), markers)
    assert [k + 1 for k, o in enumerate(outs) if o == 1] == want


# conn_delta


@pytest.mark.parametrize(
    "sets,delta,want",
    [
        ([{10}, {11}], 2, {11}),
        ([set(), {1, 2}], 5, set()),
        ([{10}, {11}, {30}], 2, set()),
        ([{1, 50}], 0, {1, 50}),
        ([{5}, {7, 8}, {6, 10}], 2, {6}),
        ([{5}, {7, 8}, {6, 10}], 3, {6, 10}),
    ],
)
def test_conn_delta_examples(sets, delta, want):
    assert conn_delta(sets, delta) == want


def test_conn_delta_empty_list():
    with pytest.raises(ValueError):
        conn_delta([], 1)


def test_conn_delta_monotone_and_subset():
    rng = random.Random(4)
    for _ in range(500):
        sets = [set(rng.sample(range(30), rng.randint(0, 5))) for _ in range(rng.randint(1, 4))]
        prev = set()
        for d in range(6):
            cur = conn_delta(sets, d)
            assert cur == conn_direct(sets, d)
            assert prev <= cur <= sets[-1]
            prev = cur


# WPM / WPB


def train(seed, **kw):
    spec = spike_train_spec(seed, 5, width=12.0, **kw)
    sig, truth = generate_synthetic(spec)
    return sig, truth


def pbar_for(grid, sbar):
    sig, (c,) = generate_synthetic(SyntheticSpec(1601, (800,), (1.0,), 12.0, 0.0, 0))
    return 0.5 * float(cwt(sig, grid).magnitude[grid.index(sbar), c])


GRID = ScaleGrid.integers(8, 32)


def test_wpm_finds_five_spikes():
    pbar = pbar_for(GRID, 24)
    sig, truth = train(3)
    ann = detect_wpm(cwt(sig, GRID), WpmParams(24, pbar, 1.0, 2))
    assert len(ann) == 5
    assert all(abs(a - b) <= 2 for a, b in zip(ann.indices, truth))


def test_wpm_zero_signal():
    sp = cwt(Signal.uniform(np.zeros(800)), GRID)
    assert len(detect_wpm(sp, WpmParams(24, 1e-6))) == 0


@pytest.mark.parametrize("seed", [0, 5])
def test_engines_agree(seed):
    grid = ScaleGrid.integers(8, 16)
    pbar = pbar_for(grid, 12)
    sig, _ = train(seed)
    sp = cwt(sig, grid)
    wpm = WpmParams(12, pbar, 1.0, 2)
    assert detect_wpm(sp, wpm, engine="qre") == detect_wpm(sp, wpm, engine="fast")
    wpb = WpbParams(12, pbar, 150)
    assert detect_wpb(sp, wpb, engine="qre") == detect_wpb(sp, wpb, engine="fast")


def test_wpm_peaks_are_scale_maxima():
    pbar = pbar_for(GRID, 24)
    sig, _ = train(1)
    sp = cwt(sig, GRID)
    row = sp.magnitude[GRID.index(24)]
    for k in detect_wpm(sp, WpmParams(24, pbar, 1.0, 2)).indices:
        near = [j for j in range(k - 2, k + 3) if row[j - 1] < row[j] > row[j + 1] and row[j] > pbar]
        assert near


def test_wpb_blanking():
    rows = np.zeros((1, 40))
    for j in (5, 8, 20):
        rows[0, j] = 1.0
    sp = spectrogram(rows)
    assert detect_wpb(sp, WpbParams(1, 0.5, 5), wavelet_sigma=1e-9).indices == (5, 20)
    assert detect_wpb(sp, WpbParams(1, 0.5, 2), wavelet_sigma=1e-9).indices == (5, 8, 20)


def test_parameter_validation():
    sp = cwt(Signal.uniform(np.zeros(100)), ScaleGrid.integers(1, 4))
    with pytest.raises(ValueError):
        detect_wpm(sp, WpmParams(2.5, 1.0))
    with pytest.raises(ValueError):
        detect_wpm(sp, WpmParams(4, 1.0, eps=0.5))
    with pytest.raises(ValueError):
        WpmParams(4, -1.0)
    with pytest.raises(ValueError):
        WpbParams(4, 1.0, bl=0)
    with pytest.raises(ValueError):
        detect_wpm(sp, WpmParams(4, 1.0), engine="slow")


def test_boundary_guard():
    assert boundary_guard(None, 80, 1e-3, 1e-3) == 480


# MDT


def run_direct(y, params):
    s = mdt_initial(params)
    flags = []
    for t, v in enumerate(y):
        s = mdt_thev(s, abs(v), params)
        if s.flag:
            flags.append(t)
    return flags, s


def test_mdt_floor():
    params = MdtParams()
    flags, s = run_direct(np.zeros(5000), params)
    assert flags == [] and s.threshold == params.pmin


def test_mdt_single_spike_resets_to_three_quarters():
    params = MdtParams(bl=10, decay=0.01, pmin=1.0, p0=50.0)
    y = np.zeros(100)
    y[20], y[22] = 60.0, 80.0
    flags, _ = run_direct(y, params)
    assert flags == [20]
    s = mdt_initial(params)
    for v in y[:31]:
        s = mdt_thev(s, v, params)
    assert not s.blanking
    assert s.threshold == pytest.approx(0.75 * 80.0 * math.exp(-0.01 * (31 - 22 - 10)))


def test_mdt_second_spike_inside_blanking():
    params = MdtParams(bl=10, decay=0.01, pmin=1.0, p0=50.0)
    y = np.zeros(60)
    y[5] = y[5 + 9] = 100.0
    assert run_direct(y, params)[0] == [5]


def test_mdt_zero_signal_and_engines():
    params = MdtParams()
    assert len(detect_mdt(Signal.uniform(np.zeros(1000)), params).annotation) == 0
    x = np.zeros(3000)
    x[400:1000:300] = 900.0
    x[2000] = -500.0
    sig = Signal.uniform(x)
    a = detect_mdt(sig, params, engine="fast")
    b = detect_mdt(sig, params, engine="qre")
    assert a.annotation == b.annotation
    assert np.allclose(a.trace, b.trace, equal_nan=True, rtol=0, atol=1e-12)
    assert a.annotation.indices == (400, 700, 2000)
    tracked = a.trace[~np.isnan(a.trace)]
    assert tracked.min() >= params.pmin


def test_mdt_flags_early_on_wide_spikes():
    sig, truth = generate_synthetic(SyntheticSpec(2000, (300, 500, 500), (1000.0,) * 3, 12.0))
    found = detect_mdt(sig).annotation.indices
    assert len(found) == 3
    assert all(f < t for f, t in zip(found, truth))


def test_mdt_params_validation():
    with pytest.raises(ValueError):
        MdtParams(pmin=300.0, p0=200.0)
    with pytest.raises(ValueError):
        MdtParams(decay=0.0)


# annotations


def test_annotation_output_and_determinism():
    ann = PeakAnnotation.from_indices([7, 3], 0.5 * np.arange(10), "wpm", {})
    buf = io.StringIO()
    write_annotation(ann, buf, ["run 1"])
    assert buf.getvalue() == "# run 1\nindex,time,detector\n3,1.5,wpm\n7,3.5,wpm\n"
    with pytest.raises(ValueError):
        PeakAnnotation((3, 3), (0.0, 0.0), "x")


def test_detectors_are_deterministic():
    grid = ScaleGrid.integers(8, 16)
    sig, _ = train(2)
    sp = cwt(sig, grid)
    runs = [detect_wpm(cwt(sig, grid), WpmParams(12, 0.01)) for _ in range(2)]
    assert runs[0] == runs[1] == detect_wpm(sp, WpmParams(12, 0.01))
