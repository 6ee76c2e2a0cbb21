"""
Batch compression of a sine-wave tensor
=======================================

Generate a noisy tensor with known multilinear ranks, compress it at two
tolerances, and look at ranks, error and storage savings.
"""

from streamtucker import (
    SineSpec,
    add_noise,
    compression_ratio,
    relative_error,
    sine_tensor,
    sthosvd,
)

# Bandwidth J in every mode gives mode ranks 2J + 1 = 11.
spec = SineSpec((100, 100, 400), (5, 5, 5), seed=1)
x = add_noise(sine_tensor(spec), 5e-4, seed=1)
print("true ranks:", spec.ranks)

for tau in (1e-2, 2e-3, 1e-3):
    model = sthosvd(x, tau)
    print(f"tau={tau:g}: ranks {model.ranks}, "
          f"relative error {relative_error(x, model):.2e}, "
          f"compression {compression_ratio(model):.0f}x")

# Tolerance below the noise floor: the noise itself has to be kept.
model = sthosvd(x, 4e-4)
print(f"tau=4e-4 (below the noise): ranks {model.ranks}")
