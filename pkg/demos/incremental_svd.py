"""
Incremental SVD and its error ledger
====================================

Rows arrive one at a time.  Each update truncates a small inner SVD, and the
energy it throws away is added to a running total.  That total equals the
squared error of the factorization against the full matrix, which we check
here by building the matrix explicitly.
"""

import numpy as np

from streamtucker import ISVDState

rng = np.random.default_rng(3)
basis = np.linalg.qr(rng.standard_normal((24, 4)))[0]
rows = rng.standard_normal((40, 4)) @ basis.T + 1e-2 * rng.standard_normal((40, 24))

state = ISVDState.empty(24)
for i, b in enumerate(rows, start=1):
    state.add_row(b, 0.05 * np.linalg.norm(b))
    if i % 10 == 0:
        full = rows[:i]
        true_sq = np.sum((full - state.matrix()) ** 2)
        print(f"{i:3d} rows, rank {state.r}: ledger {state.squared_error:.6e}, "
              f"materialized {true_sq:.6e}")

print("orthogonality drift:", f"{state.orthogonality_error():.1e}")
rel = np.sqrt(state.squared_error) / np.linalg.norm(rows)
print(f"relative error {rel:.3f} (per-row budget 0.05)")
