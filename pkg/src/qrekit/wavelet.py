"""Continuous wavelet transform with Gaussian-derivative wavelets.

Coefficients are a Riemann sum at the signal's sampling step, with the
scaled wavelet truncated at ``±6·s·σ`` and the signal zero-padded outside
its extent.
"""
from __future__ import annotations

import math
import struct
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels

__all__ = [
    "Signal",
    "WaveletSpec",
    "ScaleGrid",
    "Spectrogram",
    "SpectrogramItem",
    "SignalFormatError",
    "hermite_he",
    "mother_wavelet",
    "scaled_wavelet",
    "wavelet_taps",
    "cwt",
    "cwt_signed",
    "column_stream",
    "read_signal",
    "write_signal",
    "write_spectrogram_text",
    "write_spectrogram_binary",
    "read_spectrogram_binary",
]

SUPPORT = 6.0


class SignalFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled signal; ``times`` in seconds."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or t.shape != v.shape:
            raise SignalFormatError("times and values must be 1-d arrays of equal length")
        if len(t) == 0:
            raise SignalFormatError("signal has no samples")
        if len(t) > 1:
            d = np.diff(t)
            if np.any(d <= 0):
                raise SignalFormatError("sample times must be strictly increasing")
            if np.max(np.abs(d - d[0])) > 1e-9:
                raise SignalFormatError("sample spacing is not uniform (tolerance 1e-9 s)")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, values, dt: float = 1e-3, t0: float = 0.0) -> "Signal":
        v = np.asarray(values, dtype=np.float64)
        return cls(t0 + dt * np.arange(len(v)), v)

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            return 1e-3
        return float((self.times[-1] - self.times[0]) / (len(self.times) - 1))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class WaveletSpec:
    order: int = 2
    sigma: float = 1e-3

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"wavelet order must be a positive integer, got {self.order}")
        if not self.sigma > 0:
            raise ValueError(f"wavelet sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class ScaleGrid:
    scales: tuple

    def __post_init__(self):
        s = tuple(float(x) for x in self.scales)
        if not s:
            raise ValueError("scale grid is empty")
        if any(x <= 0 for x in s):
            raise ValueError("scales must be positive")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ValueError("scales must be strictly increasing")
        object.__setattr__(self, "scales", s)

    @classmethod
    def integers(cls, lo: int = 1, hi: int = 128) -> "ScaleGrid":
        return cls(tuple(range(lo, hi + 1)))

    def __len__(self):
        return len(self.scales)

    def index(self, s: float) -> int:
        """0-based position of ``s`` in the grid."""
        for i, x in enumerate(self.scales):
            if abs(x - s) <= 1e-12 * max(1.0, abs(s)):
                return i
        raise ValueError(f"scale {s} is not in the grid")

    @property
    def max_step(self) -> float:
        s = self.scales
        return max((b - a for a, b in zip(s, s[1:])), default=0.0)


@dataclass(frozen=True)
class SpectrogramItem(Mapping):
    """One coefficient; also readable as the record ``{s, t, w}``."""

    scale: float
    time: float
    w: float

    def __getitem__(self, key):
        if key == "s":
            return self.scale
        if key == "t":
            return self.time
        if key == "w":
            return self.w
        raise KeyError(key)

    def __iter__(self):
        return iter(("s", "t", "w"))

    def __len__(self):
        return 3


@dataclass(frozen=True)
class Spectrogram:
    """``magnitude[i, j] = |W(grid[i], times[j])|``."""

    magnitude: np.ndarray
    grid: ScaleGrid
    times: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.magnitude, dtype=np.float64)
        if m.shape != (len(self.grid), len(self.times)):
            raise ValueError(f"magnitude shape {m.shape} does not match grid x times")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ValueError("magnitudes must be finite and nonnegative")
        m.setflags(write=False)
        object.__setattr__(self, "magnitude", m)

    @property
    def shape(self):
        return self.magnitude.shape

    def restrict(self, n_scales: int) -> "Spectrogram":
        """Keep the lowest ``n_scales`` rows."""
        return Spectrogram(
            self.magnitude[:n_scales], ScaleGrid(self.grid.scales[:n_scales]), self.times
        )


def hermite_he(n: int, x):
    """Probabilists' Hermite polynomial ``He_n(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=np.float64)
    h0 = np.ones_like(x)
    if n == 0:
        return h0
    h1 = x.copy()
    for k in range(1, n):
        h0, h1 = h1, x * h1 - k * h0
    return h1


def mother_wavelet(spec: WaveletSpec, t):
    """n-th derivative of the centred Gaussian density with deviation ``sigma``."""
    sigma = spec.sigma
    u = np.asarray(t, dtype=np.float64) / sigma
    g = np.exp(-0.5 * u * u) / (sigma * math.sqrt(2.0 * math.pi))
    out = ((-1.0) ** spec.order / sigma**spec.order) * hermite_he(spec.order, u) * g
    return float(out) if np.ndim(out) == 0 else out


def scaled_wavelet(spec: WaveletSpec, s: float, t):
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    return mother_wavelet(spec, np.asarray(t, dtype=np.float64) / s) / math.sqrt(s)


def wavelet_taps(spec: WaveletSpec, s: float, dt: float) -> np.ndarray:
    """``Ψ_s(k·dt)·dt`` for ``|k·dt| <= 6·s·σ``."""
    K = int(math.floor(SUPPORT * s * spec.sigma / dt + 1e-9))
    k = np.arange(-K, K + 1, dtype=np.float64)
    return scaled_wavelet(spec, s, k * dt) * dt


def cwt_signed(x: Signal, grid: ScaleGrid, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Signed coefficients ``W[i, j] = Σ_τ x(τ) Ψ_{s_i}(τ − t_j) Δt``."""
    dt = x.dt
    vals = np.ascontiguousarray(x.values, dtype=np.float64)
    out = np.empty((len(grid), len(vals)))
    for i, s in enumerate(grid.scales):
        out[i] = kernels.correlate_taps(vals, np.ascontiguousarray(wavelet_taps(spec, s, dt)))
    return out


def cwt(x: Signal, grid: ScaleGrid, spec: WaveletSpec = WaveletSpec()) -> Spectrogram:
    return Spectrogram(np.abs(cwt_signed(x, grid, spec)), grid, x.times)


def column_stream(sp: Spectrogram) -> Iterator[SpectrogramItem]:
    """Items column by column; within a column from the largest scale down."""
    mag = sp.magnitude
    scales = sp.grid.scales
    n = len(scales)
    for j, t in enumerate(sp.times):
        tj = float(t)
        for i in range(n - 1, -1, -1):
            yield SpectrogramItem(scales[i], tj, float(mag[i, j]))


# ---------------------------------------------------------------------------
# I/O


def read_signal(path_or_file) -> Signal:
    """Read a ``t,v`` table (header row, ``#`` comments allowed)."""
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "r", encoding="utf-8") as fh:
            return _parse_signal(fh)
    return _parse_signal(path_or_file)


def _parse_signal(fh) -> Signal:
    times, values = [], []
    header_seen = False
    for lineno, raw in enumerate(fh, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            cols = [c.strip() for c in line.split(",")]
            if cols != ["t", "v"]:
                raise SignalFormatError(f"line {lineno}: expected header 't,v', got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise SignalFormatError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            t, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise SignalFormatError(f"line {lineno}: not a number in {line!r}") from None
        if not (math.isfinite(t) and math.isfinite(v)):
            raise SignalFormatError(f"line {lineno}: non-finite value")
        times.append(t)
        values.append(v)
    if not header_seen:
        raise SignalFormatError("missing 't,v' header")
    if not times:
        raise SignalFormatError("no samples after the header")
    return Signal(np.array(times), np.array(values))


def write_signal(sig: Signal, fh, comments: Sequence[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write("t,v\n")
    for t, v in zip(sig.times, sig.values):
        fh.write(f"{float(t):.12g},{float(v)!r}\n")


def write_spectrogram_text(sp: Spectrogram, fh, comments: Sequence[str] = ()) -> None:
    for c in comments:
        fh.write(f"# {c}\n")
    fh.write("s,t,w\n")
    for i, s in enumerate(sp.grid.scales):
        row = sp.magnitude[i]
        for j, t in enumerate(sp.times):
            fh.write(f"{s!r},{float(t):.12g},{float(row[j])!r}\n")


_MAGIC = b"QSPG"


def write_spectrogram_binary(sp: Spectrogram, fh) -> None:
    """Layout: ``b'QSPG'``, then ``n_scales`` and ``n_times`` as little-endian
    uint64, the scales, the times, and the magnitudes row-major (one row per
    scale), all little-endian float64."""
    n, m = sp.shape
    fh.write(_MAGIC)
    fh.write(struct.pack("<QQ", n, m))
    fh.write(np.asarray(sp.grid.scales, dtype="<f8").tobytes())
    fh.write(np.asarray(sp.times, dtype="<f8").tobytes())
    fh.write(np.ascontiguousarray(sp.magnitude, dtype="<f8").tobytes())


def read_spectrogram_binary(fh) -> Spectrogram:
    if fh.read(4) != _MAGIC:
        raise SignalFormatError("not a spectrogram dump")
    n, m = struct.unpack("<QQ", fh.read(16))
    scales = np.frombuffer(fh.read(8 * n), dtype="<f8")
    times = np.frombuffer(fh.read(8 * m), dtype="<f8")
    mag = np.frombuffer(fh.read(8 * n * m), dtype="<f8").reshape(n, m)
    return Spectrogram(mag.copy(), ScaleGrid(tuple(scales)), times.copy())
