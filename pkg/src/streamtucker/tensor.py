"""Dense tensor primitives.

Tensors are plain ``numpy.ndarray`` objects of dtype float64.  Element
``(i_1, ..., i_d)`` sits at linear offset ``sum_l i_l * prod_{l' < l} N_l'``
(mode 0 varies fastest, i.e. Fortran order), so the mode-0 unfolding of a
Fortran-contiguous tensor is a reshape and every other unfolding is a copy.

Modes are zero-based throughout the package.
"""

import numpy as np

__all__ = [
    "as_tensor",
    "unfold",
    "fold",
    "ttm",
    "multi_ttm",
    "frobenius_norm",
    "pad_with_zeros",
    "concat_along_mode",
    "vectorize",
]


def as_tensor(x):
    """Return `x` as a Fortran-ordered float64 array (no copy when possible)."""
    t = np.asarray(x, dtype=np.float64)
    if t.ndim == 0:
        raise ValueError("a tensor needs at least one mode")
    if any(n < 1 for n in t.shape):
        raise ValueError(f"every mode size must be positive, got {t.shape}")
    return np.asfortranarray(t)


def _check_mode(ndim, k):
    if not 0 <= k < ndim:
        raise ValueError(f"mode {k} out of range for a {ndim}-way tensor")


def unfold(t, k):
    """Mode-`k` matricization.

    Parameters
    ----------
    t : ndarray
        Tensor of shape ``(N_0, ..., N_{d-1})``.
    k : int
        Mode index, ``0 <= k < d``.

    Returns
    -------
    ndarray
        Matrix of shape ``(N_k, prod_{l != k} N_l)``.  Column ordering runs
        over the remaining modes with the lowest mode varying fastest.
    """
    t = np.asarray(t)
    _check_mode(t.ndim, k)
    if k == 0:
        return t.reshape(t.shape[0], -1, order="F")
    moved = np.moveaxis(t, k, 0)
    return np.array(moved.reshape(t.shape[k], -1, order="F"), order="F")


def fold(m, k, dims):
    """Inverse of :func:`unfold`: rebuild a tensor of shape `dims`."""
    m = np.asarray(m)
    dims = tuple(int(n) for n in dims)
    _check_mode(len(dims), k)
    rest = int(np.prod(dims)) // dims[k]
    if m.shape != (dims[k], rest):
        raise ValueError(
            f"matrix of shape {m.shape} cannot fold into {dims} along mode {k}"
        )
    moved_dims = (dims[k],) + dims[:k] + dims[k + 1:]
    moved = m.reshape(moved_dims, order="F")
    return np.asfortranarray(np.moveaxis(moved, 0, k))


def ttm(t, k, a, transpose=False):
    """Tensor-times-matrix product along mode `k`.

    Computes ``t x_k op(a)`` where ``op(a)`` is ``a.T`` when `transpose` is
    set.  The result's mode-`k` unfolding equals ``op(a) @ unfold(t, k)``.
    """
    t = np.asarray(t)
    a = np.asarray(a, dtype=np.float64)
    _check_mode(t.ndim, k)
    if a.ndim != 2:
        raise ValueError("ttm expects a matrix operand")
    op = a.T if transpose else a
    if op.shape[1] != t.shape[k]:
        raise ValueError(
            f"cannot multiply {op.shape} matrix into mode {k} of size {t.shape[k]}"
        )
    dims = list(t.shape)
    dims[k] = op.shape[0]
    if k == 0:
        # (X_(0)^T op^T)^T comes out Fortran ordered with no extra copy.
        x0 = t.reshape(t.shape[0], -1, order="F")
        out = (x0.T @ op.T).T
        return out.reshape(dims, order="F")
    # Contract mode k, then put the new axis back in place.
    out = np.tensordot(t, op, axes=([k], [1]))
    return np.asfortranarray(np.moveaxis(out, -1, k))


def multi_ttm(t, matrices, transpose=False, skip=None):
    """Apply :func:`ttm` along every mode for which a matrix is given.

    ``matrices[k] is None`` or ``k == skip`` leaves mode `k` untouched.
    """
    out = t
    for k, a in enumerate(matrices):
        if a is None or k == skip:
            continue
        out = ttm(out, k, a, transpose=transpose)
    return out


def frobenius_norm(t):
    """Square root of the sum of squared entries."""
    t = np.asarray(t)
    flat = t.ravel(order="K")
    return float(np.sqrt(np.dot(flat, flat)))


def pad_with_zeros(t, k, extra):
    """Append `extra` zero hyperslices to mode `k`."""
    t = np.asarray(t)
    _check_mode(t.ndim, k)
    if extra < 0:
        raise ValueError("padding must be nonnegative")
    if extra == 0:
        return t
    dims = list(t.shape)
    dims[k] += extra
    out = np.zeros(dims, order="F")
    index = [slice(None)] * t.ndim
    index[k] = slice(0, t.shape[k])
    out[tuple(index)] = t
    return out


def concat_along_mode(k, a, b):
    """Stack `b` after `a` along mode `k`; all other mode sizes must agree."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != b.ndim:
        raise ValueError("tensors differ in order")
    _check_mode(a.ndim, k)
    for ell, (na, nb) in enumerate(zip(a.shape, b.shape)):
        if ell != k and na != nb:
            raise ValueError(
                f"shapes {a.shape} and {b.shape} differ off mode {k}"
            )
    return np.asfortranarray(np.concatenate([a, b], axis=k))


def vectorize(t):
    """Data buffer of `t` in layout order (mode 0 fastest)."""
    return np.asarray(t).ravel(order="F")
