"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``."""
from __future__ import annotations

import math

import numpy as np


def correlate_taps(x, taps):
    """out[j] = sum_k x[j + k - K] * taps[k], zero outside x; len(taps) == 2K + 1."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    taps = np.ascontiguousarray(taps, dtype=np.float64)
    m, nt = len(x), len(taps)
    K = nt // 2
    out = np.zeros(m)
    for j in range(m):
        lo = max(0, K - j)
        hi = min(nt, m - j + K)
        acc = 0.0
        for k in range(lo, hi):
            acc += x[j + k - K] * taps[k]
        out[j] = acc
    return out


def strict_local_maxima(row, threshold):
    row = np.asarray(row, dtype=np.float64)
    out = []
    for j in range(1, len(row) - 1):
        b = row[j]
        if b > row[j - 1] and b > row[j + 1] and b > threshold:
            out.append(j)
    return np.array(out, dtype=np.int64)


def conn_pair(xs, ys, delta):
    out = []
    i, nx = 0, len(xs)
    for y in ys:
        while i < nx and xs[i] < y - delta:
            i += 1
        if i < nx and xs[i] <= y + delta:
            out.append(int(y))
    return np.array(out, dtype=np.int64)


def mdt_run(y, p0, bl, lam, pmin):
    y = np.asarray(y, dtype=np.float64)
    m = len(y)
    p, decay, ym, tm, counter, blanking = float(p0), math.exp(-lam), 0.0, 0, 0, False
    peaks = []
    trace = np.empty(m)
    for t in range(m):
        v = float(y[t])
        if blanking:
            trace[t] = math.nan
            counter += 1
            if v > ym:
                ym, tm = v, t
            if counter == bl:
                blanking = False
                p = 0.75 * ym * math.exp(-lam * float(t + 1 - tm - bl))
                if p < pmin:
                    p = pmin
        else:
            trace[t] = p
            if v > p:
                peaks.append(t)
                blanking, counter, ym, tm = True, 0, v, t
            else:
                p = p * decay
                if p < pmin:
                    p = pmin
    return np.array(peaks, dtype=np.int64), trace
