"""Small dense linear algebra used by the batch and streaming compressors."""

from typing import NamedTuple

import numpy as np

__all__ = [
    "EigenResult",
    "SmallSVD",
    "gram",
    "sym_eig_desc",
    "jacobi_eigh",
    "truncation_rank",
    "small_svd_truncated",
]

CLAMP_EPS = 1e-12
SVD_ZERO_EPS = 1e-14


class EigenResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SmallSVD(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray
    discarded_sq: float


def gram(m):
    """Return ``m @ m.T``, symmetrized so it is exactly symmetric."""
    m = np.asarray(m, dtype=np.float64)
    g = m @ m.T
    return 0.5 * (g + g.T)


def jacobi_eigh(g, tol=1e-14, max_sweeps=30):
    """Cyclic Jacobi eigensolver for a small symmetric matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius mass
    drops below ``tol * ||g||_F``.  Returns unsorted ``(w, v)`` like
    :func:`numpy.linalg.eigh`.
    """
    a = np.array(g, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return np.diag(a).copy(), v


def _fix_signs(vectors):
    # Largest-magnitude entry of every column made positive; first index wins ties.
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig_desc(g, method="lapack", clamp=True):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    g : ndarray
        Square symmetric matrix.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls :func:`numpy.linalg.eigh`; ``"jacobi"`` uses the
        pure-numpy cyclic Jacobi solver (only sensible for small `g`).
    clamp : bool
        Set eigenvalues below ``-1e-12 * lambda_max`` and all remaining
        negative values to zero.

    Returns
    -------
    EigenResult
        Eigenvectors carry a deterministic sign: the largest-magnitude
        component of each column is positive.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {g.shape}")
    if method == "lapack":
        w, v = np.linalg.eigh(g)
    elif method == "jacobi":
        w, v = jacobi_eigh(g)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(w, kind="stable")[::-1]
    w = w[order]
    v = _fix_signs(v[:, order])
    if clamp:
        w = np.where(w < 0.0, 0.0, w)
    return EigenResult(w, v)


def truncation_rank(eigenvalues, delta):
    """Smallest rank whose discarded eigenvalue tail is at most ``delta**2``.

    Returns at least 1, and ``len(eigenvalues)`` when nothing can be cut.
    """
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if lam.size == 0:
        return 0
    if np.any(np.diff(lam) > 0.0):
        raise ValueError("eigenvalues must be sorted in descending order")
    # tail[l] = lambda_l + ... + lambda_{n-1}, summed smallest first.
    tail = np.concatenate([np.cumsum(lam[::-1])[::-1], [0.0]])
    rank = int(np.argmax(tail <= delta * delta))
    return max(rank, 1)


def small_svd_truncated(m, abs_threshold, min_rank=1):
    """Truncated SVD of a small dense matrix.

    Keeps the fewest leading singular triplets such that the discarded
    energy ``sum(sigma_j**2)`` stays within ``abs_threshold**2``.  Singular
    values below ``1e-14 * sigma_max`` are always dropped.  At least
    `min_rank` triplets are kept while nonzero ones remain.

    Returns
    -------
    SmallSVD
        ``left`` (rows x r), ``singular_values`` (r,), ``right`` (cols x r)
        and the exact discarded energy.
    """
    m = np.asarray(m, dtype=np.float64)
    if abs_threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if m.size == 0:
        return SmallSVD(np.zeros((m.shape[0], 0)), np.zeros(0),
                        np.zeros((m.shape[1], 0)), 0.0)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    nonzero = int(np.sum(s > SVD_ZERO_EPS * s[0])) if s[0] > 0 else 0
    tail = np.concatenate([np.cumsum((s * s)[::-1])[::-1], [0.0]])
    rank = int(np.argmax(tail <= abs_threshold * abs_threshold))
    rank = min(max(rank, min(min_rank, nonzero)), nonzero)
    u = _fix_signs_pair(u[:, :rank], vt[:rank].T)
    return SmallSVD(u[0], s[:rank].copy(), u[1], float(tail[rank]))


def _fix_signs_pair(u, v):
    if u.size == 0:
        return u, v
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs, v * signs
