"""Synthetic "sine wave" tensors with known Tucker ranks, plus noise.

The clean tensor samples

    f(x_0, ..., x_{d-1}) = sum_j c_j sin(j_0 x_0 + ... + j_{d-1} x_{d-1})

with ``j_k`` running over ``-J_k..J_k`` on the grid ``x_{k,i} = 2 pi i / N_k``.
Along mode k every fiber lies in span{1, cos(j x), sin(j x) : j <= J_k}, so
the mode-k rank is ``2 J_k + 1`` for generic coefficients.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = ["SineSpec", "sine_tensor", "sine_slice", "add_noise", "noisy_slices"]


@dataclass
class SineSpec:
    dims: Tuple[int, ...]
    bandwidths: Tuple[int, ...]
    seed: int = 0
    coefficients: Optional[np.ndarray] = None

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.bandwidths = tuple(int(j) for j in self.bandwidths)
        if len(self.dims) != len(self.bandwidths):
            raise ValueError("dims and bandwidths differ in length")
        if any(n < 1 for n in self.dims) or any(j < 0 for j in self.bandwidths):
            raise ValueError("dims must be positive and bandwidths nonnegative")
        box = tuple(2 * j + 1 for j in self.bandwidths)
        if self.coefficients is None:
            rng = np.random.default_rng(self.seed)
            mag = rng.uniform(0.5, 1.5, size=box)
            sign = rng.choice([-1.0, 1.0], size=box)
            self.coefficients = mag * sign
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if self.coefficients.shape != box:
            raise ValueError(f"coefficients must have shape {box}")

    @property
    def ranks(self):
        return tuple(2 * j + 1 for j in self.bandwidths)


def _grid(n):
    return 2.0 * np.pi * np.arange(n) / n


def _phases(n, bandwidth, points=None):
    # exp(i * j * x) for x on the grid, j = -J..J
    x = _grid(n) if points is None else points
    freqs = np.arange(-bandwidth, bandwidth + 1)
    return np.exp(1j * np.outer(x, freqs))


def _complex_ttm(t, k, a):
    out = np.tensordot(t, a, axes=([k], [1]))
    return np.moveaxis(out, -1, k)


def _evaluate(spec, last_points):
    """Sample f with the last mode evaluated at `last_points`."""
    d = len(spec.dims)
    w = spec.coefficients.astype(np.complex128)
    for k in range(d - 1):
        w = _complex_ttm(w, k, _phases(spec.dims[k], spec.bandwidths[k]))
    # Im(W x_d E) = Re(W) x_d Im(E) + Im(W) x_d Re(E); stays real-valued.
    e = _phases(spec.dims[-1], spec.bandwidths[-1], last_points)
    out = np.tensordot(w.real, e.imag, axes=([d - 1], [1]))
    out += np.tensordot(w.imag, e.real, axes=([d - 1], [1]))
    return np.asfortranarray(out)


def sine_tensor(spec):
    """Clean sine-wave tensor of shape ``spec.dims``."""
    return _evaluate(spec, _grid(spec.dims[-1]))


def sine_slice(spec, index):
    """Clean slice ``X[..., index]`` computed without building the full tensor."""
    x = _grid(spec.dims[-1])[index:index + 1]
    return np.asfortranarray(_evaluate(spec, x)[..., 0])


def _slice_noise(shape, seed, index):
    rng = np.random.default_rng([seed, index])
    return np.asfortranarray(rng.standard_normal(shape))


def _scaled_noise(clean, eta, seed, index):
    noise = _slice_noise(clean.shape, seed, index)
    target = eta * np.linalg.norm(clean)
    current = np.linalg.norm(noise)
    return noise * (target / current) if current > 0 else noise * 0.0


def add_noise(x, eta, seed=0):
    """Add Gaussian noise scaled per streaming-mode slice.

    Slice ``i`` of the noise has Frobenius norm ``eta * ||x[..., i]||``.
    Noise for slice ``i`` is drawn from a generator seeded with
    ``(seed, i)``, so slice-by-slice generation gives identical values.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"noise ratio must lie in [0, 1), got {eta}")
    x = np.asarray(x, dtype=np.float64)
    if eta == 0.0:
        return x.copy(order="F")
    out = np.array(x, order="F")
    for i in range(x.shape[-1]):
        out[..., i] += _scaled_noise(x[..., i], eta, seed, i)
    return out


def noisy_slices(spec, eta, seed=0, start=0, stop=None):
    """Yield noisy slices one at a time, matching ``add_noise(sine_tensor(spec))``."""
    stop = spec.dims[-1] if stop is None else stop
    for i in range(start, stop):
        clean = sine_slice(spec, i)
        if eta == 0.0:
            yield clean
        else:
            yield clean + _scaled_noise(clean, eta, seed, i)
