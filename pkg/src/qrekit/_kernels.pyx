# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def correlate_taps(const double[::1] x, const double[::1] taps):
    """out[j] = sum_k x[j + k - K] * taps[k], zero outside x; len(taps) == 2K + 1."""
    cdef Py_ssize_t m = x.shape[0], nt = taps.shape[0], K = nt // 2
    cdef Py_ssize_t j, k, lo, hi, i
    cdef double acc
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    for j in range(m):
        lo = K - j
        if lo < 0:
            lo = 0
        hi = m - j + K
        if hi > nt:
            hi = nt
        acc = 0.0
        for k in range(lo, hi):
            acc += x[j + k - K] * taps[k]
        o[j] = acc
    return out


def strict_local_maxima(const double[::1] row, double threshold):
    """Indices j with row[j-1] < row[j] > row[j+1] and row[j] > threshold."""
    cdef Py_ssize_t m = row.shape[0], j, n = 0
    out = np.empty(m if m > 0 else 1, dtype=np.int64)
    cdef long long[::1] o = out
    cdef double b
    for j in range(1, m - 1):
        b = row[j]
        if b > row[j - 1] and b > row[j + 1] and b > threshold:
            o[n] = j
            n += 1
    return out[:n].copy()


def conn_pair(const long long[::1] xs, const long long[::1] ys, long long delta):
    """Members y of sorted ys with some x in sorted xs, |x - y| <= delta."""
    cdef Py_ssize_t nx = xs.shape[0], ny = ys.shape[0], i = 0, j, n = 0
    out = np.empty(ny if ny > 0 else 1, dtype=np.int64)
    cdef long long[::1] o = out
    cdef long long y
    for j in range(ny):
        y = ys[j]
        while i < nx and xs[i] < y - delta:
            i += 1
        if i < nx and xs[i] <= y + delta:
            o[n] = y
            n += 1
    return out[:n].copy()


def mdt_run(const double[::1] y, double p0, long long bl, double lam, double pmin):
    """Threshold automaton over the rectified signal.

    Returns ``(peaks, trace)``; ``trace[t]`` is the threshold in force at
    sample ``t`` (NaN while blanking).
    """
    cdef Py_ssize_t m = y.shape[0], t, n = 0
    cdef double p = p0, decay = exp(-lam), ym = 0.0, v
    cdef long long tm = 0, counter = 0
    cdef bint blanking = False
    peaks = np.empty(m if m > 0 else 1, dtype=np.int64)
    trace = np.empty(m, dtype=np.float64)
    cdef long long[::1] pk = peaks
    cdef double[::1] tr = trace
    for t in range(m):
        v = y[t]
        if blanking:
            tr[t] = np.nan
            counter += 1
            if v > ym:
                ym = v
                tm = t
            if counter == bl:
                blanking = False
                p = 0.75 * ym * exp(-lam * <double>(t + 1 - tm - bl))
                if p < pmin:
                    p = pmin
        else:
            tr[t] = p
            if v > p:
                pk[n] = t
                n += 1
                blanking = True
                counter = 0
                ym = v
                tm = t
            else:
                p = p * decay
                if p < pmin:
                    p = pmin
    return peaks[:n].copy(), trace
