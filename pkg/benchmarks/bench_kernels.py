"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import math
import timeit

import numpy as np

from qrekit import _kernels_py

try:
    from qrekit import _kernels as _compiled
except ImportError:
    _compiled = None


def cases():
    rng = np.random.default_rng(0)
    x = rng.normal(size=20000)
    taps = rng.normal(size=121)
    row = np.abs(rng.normal(size=200000))
    xs = np.unique(rng.integers(0, 10**6, size=20000)).astype(np.int64)
    ys = np.unique(rng.integers(0, 10**6, size=20000)).astype(np.int64)
    y = np.abs(rng.normal(scale=80, size=200000))
    y[::700] += 900
    return {
        "correlate_taps (20k x 121)": lambda k: k.correlate_taps(x, taps),
        "strict_local_maxima (200k)": lambda k: k.strict_local_maxima(row, 1.0),
        "conn_pair (20k x 20k)": lambda k: k.conn_pair(xs, ys, 3),
        "mdt_run (200k)": lambda k: k.mdt_run(y, 200.0, 150, math.log(2) / 300, 20.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':30s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if _compiled is None:
            print(f"{name:30s} {t_py:11.4f} {'-':>11s} {'-':>9s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat))
        print(f"{name:30s} {t_py:11.4f} {t_c:11.4f} {t_py / t_c:8.0f}x")


if __name__ == "__main__":
    main()
