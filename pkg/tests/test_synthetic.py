import numpy as np
import pytest

from qrekit.synthetic import SyntheticSpec, generate_synthetic, spike_train_spec


def test_single_clean_spike_peaks_at_centre():
    sig, (c,) = generate_synthetic(SyntheticSpec(400, (150,), (2.0,), 4.0))
    assert int(np.argmax(sig.values)) == c == 150
    assert sig.values[c] == 2.0


def test_seed_reproducible():
    spec = spike_train_spec(11)
    a, _ = generate_synthetic(spec)
    b, _ = generate_synthetic(spike_train_spec(11))
    assert a.values.tobytes() == b.values.tobytes()
    assert spike_train_spec(12) != spec


@pytest.mark.parametrize("seed", range(5))
def test_k_spikes_k_maxima(seed):
    spec = spike_train_spec(seed, 6, noise_ratio=0.0, spread=0.5)
    sig, truth = generate_synthetic(spec)
    v = sig.values
    half = 0.5 * min(spec.amplitudes)
    peaks = [j for j in range(1, len(v) - 1) if v[j - 1] < v[j] > v[j + 1] and v[j] > half]
    assert peaks == list(truth)


def test_noise_bounded():
    spec = spike_train_spec(0, 3, amplitude=5.0, noise_ratio=0.2)
    sig, truth = generate_synthetic(spec)
    clean, _ = generate_synthetic(SyntheticSpec(spec.length, spec.gaps, spec.amplitudes, spec.width))
    assert np.max(np.abs(sig.values - clean.values)) <= 1.0


@pytest.mark.parametrize(
    "kw",
    [
        dict(length=100, gaps=(10, 5), amplitudes=(1.0, 1.0), width=3.0),
        dict(length=100, gaps=(200,), amplitudes=(1.0,)),
        dict(length=100, gaps=(10,), amplitudes=(1.0, 2.0)),
        dict(length=100, gaps=(10,), amplitudes=(1.0,), noise=-1.0),
        dict(length=100, gaps=(0,), amplitudes=(1.0,)),
    ],
)
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        SyntheticSpec(**kw)


def test_negative_spread():
    with pytest.raises(ValueError):
        spike_train_spec(0, spread=-0.1)
