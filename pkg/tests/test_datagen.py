import itertools

import numpy as np
import pytest

from streamtucker.datagen import SineSpec, add_noise, noisy_slices, sine_slice, sine_tensor
from streamtucker.sthosvd import sthosvd
from streamtucker.tensor import unfold


def direct_sum(spec):
    """Evaluate the sine sum point by point."""
    grids = [2 * np.pi * np.arange(n) / n for n in spec.dims]
    ranges = [range(-j, j + 1) for j in spec.bandwidths]
    out = np.zeros(spec.dims)
    for idx in itertools.product(*[range(n) for n in spec.dims]):
        x = [g[i] for g, i in zip(grids, idx)]
        total = 0.0
        for js in itertools.product(*ranges):
            c = spec.coefficients[tuple(j + b for j, b in zip(js, spec.bandwidths))]
            total += c * np.sin(sum(j * xi for j, xi in zip(js, x)))
        out[idx] = total
    return out


def numerical_rank(m, rel=1e-10):
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rel * s[0]))


def test_zero_bandwidth_vanishes():
    spec = SineSpec((4, 5, 3), (0, 0, 0), coefficients=np.ones((1, 1, 1)))
    assert not sine_tensor(spec).any()


def test_matches_direct_sum():
    spec = SineSpec((5, 4, 6), (1, 2, 1), seed=4)
    np.testing.assert_allclose(sine_tensor(spec), direct_sum(spec), atol=1e-12)


def test_flat_mode_gives_rank_one():
    # Nothing varies along mode 1, so every column of the matrix is the same.
    x = sine_tensor(SineSpec((20, 15), (2, 0), seed=5))
    assert numerical_rank(unfold(x, 0)) == 1
    assert np.ptp(x, axis=1).max() == 0.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_rank_ground_truth(seed):
    spec = SineSpec((30, 25, 40), (3, 2, 4), seed=seed)
    x = sine_tensor(spec)
    assert tuple(numerical_rank(unfold(x, k)) for k in range(3)) == spec.ranks


def test_batch_compressor_recovers_ranks():
    spec = SineSpec((50, 50, 100), (5, 5, 5), seed=3)
    assert sthosvd(sine_tensor(spec), 1e-6).ranks == (11, 11, 11)


def test_slice_matches_tensor():
    spec = SineSpec((6, 7, 9), (2, 2, 3), seed=6)
    x = sine_tensor(spec)
    for i in (0, 4, 8):
        np.testing.assert_allclose(sine_slice(spec, i), x[..., i], atol=1e-12)


def test_noise_zero_is_identity():
    x = sine_tensor(SineSpec((5, 6, 7), (1, 1, 1), seed=7))
    np.testing.assert_array_equal(add_noise(x, 0.0, seed=1), x)


def test_noise_ratio_per_slice():
    x = sine_tensor(SineSpec((8, 9, 10), (2, 2, 2), seed=8))
    eta = 5e-4
    noisy = add_noise(x, eta, seed=3)
    for i in range(x.shape[-1]):
        ratio = np.linalg.norm(noisy[..., i] - x[..., i]) / np.linalg.norm(x[..., i])
        assert ratio == pytest.approx(eta, rel=1e-9)


def test_noise_exact_scaling_of_drawn_noise():
    # Isolate the scaling from the subtraction roundoff above.
    from streamtucker.datagen import _scaled_noise

    clean = np.random.default_rng(0).standard_normal((6, 5))
    n = _scaled_noise(clean, 7e-4, seed=2, index=3)
    assert np.linalg.norm(n) / np.linalg.norm(clean) == pytest.approx(7e-4, rel=1e-12)


def test_noise_deterministic():
    x = sine_tensor(SineSpec((5, 6, 7), (1, 1, 1), seed=9))
    np.testing.assert_array_equal(add_noise(x, 1e-3, seed=4), add_noise(x, 1e-3, seed=4))
    assert not np.array_equal(add_noise(x, 1e-3, seed=4), add_noise(x, 1e-3, seed=5))


def test_noise_eta_range():
    with pytest.raises(ValueError):
        add_noise(np.ones((2, 2)), 1.0)


def test_generator_is_pure():
    a = SineSpec((4, 4, 4), (1, 1, 1), seed=10)
    b = SineSpec((4, 4, 4), (1, 1, 1), seed=10)
    np.testing.assert_array_equal(sine_tensor(a), sine_tensor(b))


def test_noisy_slices_match_full_tensor():
    spec = SineSpec((6, 5, 8), (1, 2, 2), seed=11)
    full = add_noise(sine_tensor(spec), 1e-3, seed=12)
    for i, y in enumerate(noisy_slices(spec, 1e-3, seed=12)):
        np.testing.assert_allclose(y, full[..., i], rtol=0, atol=1e-12)
