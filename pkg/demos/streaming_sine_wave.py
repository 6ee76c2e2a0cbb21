"""
Streaming compression, one slice at a time
==========================================

Start from the first 200 slices, then feed the rest one by one.  The model
never holds more than one new slice of raw data, yet it ends up with the same
ranks as the batch compressor.
"""

import numpy as np

from streamtucker import (
    SineSpec,
    estimate_relative_error,
    noisy_slices,
    reconstruct,
    sthosvd,
    stream_init,
    stream_update,
)

spec = SineSpec((100, 100, 1000), (5, 5, 5), seed=1)
eta, tau, n_init = 5e-4, 2e-3, 200

slices = noisy_slices(spec, eta, seed=1)
first = np.stack([next(slices) for _ in range(n_init)], axis=-1)
state = stream_init(first, tau, track_memory=True)
print(f"after {state.n_d} slices: ranks {state.ranks}")

for y in slices:
    before = state.ranks
    stream_update(state, y, track_memory=True)
    if state.ranks != before:
        print(f"slice {state.n_d}: ranks {before} -> {state.ranks}")

print(f"final ranks {state.ranks}, "
      f"estimated error {estimate_relative_error(state):.2e}, "
      f"peak tracked memory {state.peak_bytes / 2**20:.1f} MiB")

# At this size the full tensor still fits, so compare against batch.
x = np.stack(list(noisy_slices(spec, eta, seed=1)), axis=-1)
batch = sthosvd(x, tau)
err = np.linalg.norm(x - reconstruct(state.model)) / np.linalg.norm(x)
print(f"batch ranks {batch.ranks}; streaming true error {err:.2e} (tau {tau:g})")
print(f"raw data {x.nbytes / 2**20:.0f} MiB, model {state.model.nbytes / 2**20:.2f} MiB")
