"""
Unfoldings and mode products
============================

Small walk through the layout conventions: mode 0 varies fastest, a mode-k
unfolding puts mode k on the rows, and a mode-k product multiplies that
unfolding from the left.
"""

import numpy as np

from streamtucker import fold, frobenius_norm, ttm, unfold

# A 2x2x2 tensor holding 1..8 in storage order.
t = np.arange(1.0, 9.0).reshape((2, 2, 2), order="F")
print("mode-0 unfolding:\n", unfold(t, 0))
print("mode-2 unfolding:\n", unfold(t, 2))

# Folding undoes unfolding exactly.
assert np.array_equal(fold(unfold(t, 1), 1, t.shape), t)

# Summing the two rows of every mode-0 fiber.
print("row sums along mode 0:", ttm(t, 0, np.ones((1, 2))).ravel(order="F"))

# Products along different modes commute.
rng = np.random.default_rng(0)
a, b = rng.standard_normal((3, 2)), rng.standard_normal((4, 2))
gap = frobenius_norm(ttm(ttm(t, 0, a), 2, b) - ttm(ttm(t, 2, b), 0, a))
print(f"commutation gap: {gap:.1e}")
