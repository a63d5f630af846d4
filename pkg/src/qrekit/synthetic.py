"""Seeded synthetic test signals: Gaussian spikes plus uniform noise."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavelet import Signal

__all__ = ["SyntheticSpec", "generate_synthetic", "spike_train_spec"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Spikes at ``first + cumsum(gaps)`` (sample indices).

    ``gaps[0]`` is the offset of the first spike from sample 0.
    """

    length: int
    gaps: tuple
    amplitudes: tuple
    width: float = 3.0  # spike standard deviation, in samples
    noise: float = 0.0  # half-width of the uniform noise
    seed: int = 0
    dt: float = 1e-3

    def __post_init__(self):
        gaps = tuple(int(g) for g in self.gaps)
        amps = tuple(float(a) for a in self.amplitudes)
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "amplitudes", amps)
        if self.length < 1:
            raise ValueError("length must be positive")
        if len(gaps) != len(amps):
            raise ValueError("need one amplitude per spike")
        if any(g <= 0 for g in gaps):
            raise ValueError("gaps must be positive")
        if not self.width > 0:
            raise ValueError("spike width must be positive")
        if self.noise < 0:
            raise ValueError("noise amplitude must be nonnegative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        centers = np.cumsum(gaps)
        if len(centers) and centers[-1] >= self.length:
            raise ValueError(f"spike at sample {centers[-1]} does not fit in length {self.length}")
        if any(g < 3 * self.width for g in gaps[1:]):
            raise ValueError("spikes closer than 3 widths; ground truth would be ambiguous")

    @property
    def centers(self) -> tuple:
        return tuple(int(c) for c in np.cumsum(self.gaps))


def generate_synthetic(spec: SyntheticSpec):
    """Return ``(signal, true_peak_indices)``."""
    n = np.arange(spec.length, dtype=np.float64)
    x = np.zeros(spec.length)
    for c, a in zip(spec.centers, spec.amplitudes):
        x += a * np.exp(-0.5 * ((n - c) / spec.width) ** 2)
    if spec.noise > 0:
        rng = np.random.default_rng(spec.seed)
        x += rng.uniform(-spec.noise, spec.noise, spec.length)
    return Signal.uniform(x, spec.dt), spec.centers


def spike_train_spec(
    seed: int,
    k: int = 5,
    *,
    amplitude: float = 1.0,
    spread: float = 0.0,
    noise_ratio: float = 0.1,
    width: float = 3.0,
    min_gap: int = 300,
    max_gap: int = 500,
    margin: int = 200,
    dt: float = 1e-3,
) -> SyntheticSpec:
    """``k`` spikes with random gaps in ``[min_gap, max_gap]``.

    Amplitudes are uniform in ``[amplitude, (1 + spread)·amplitude]`` and the
    noise half-width is ``noise_ratio · amplitude``.
    """
    if spread < 0:
        raise ValueError("amplitude spread must be nonnegative")
    rng = np.random.default_rng(seed)
    gaps = [margin] + [int(g) for g in rng.integers(min_gap, max_gap + 1, size=k - 1)]
    amps = [float(a) for a in rng.uniform(amplitude, (1.0 + spread) * amplitude, size=k)]
    length = int(sum(gaps) + margin + 1)
    return SyntheticSpec(length, tuple(gaps), tuple(amps), width, noise_ratio * amplitude, seed, dt)
