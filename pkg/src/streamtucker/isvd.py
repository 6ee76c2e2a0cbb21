"""Incremental SVD: append rows to an implicitly held, truncated SVD."""

import numpy as np

from .linalg import small_svd_truncated

__all__ = [
    "ISVDState",
    "isvd_init",
    "isvd_error_trace",
    "isvd_error_identity_check",
]

ORTHO_TOL = 1e-6
ORTH_EPS = 1e-12


def _orthonormality_error(m):
    if m.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(m.T @ m - np.eye(m.shape[1]))))


class ISVDState:
    """Truncated SVD ``A ~ left @ diag(singular_values) @ right.T``.

    ``squared_error`` tracks ``||A - left S right^T||_F**2`` without ever
    holding ``A``: the initial factorization error plus, for every appended
    row, the energy the inner SVD throws away.

    The state is owned by one caller and mutated in place by
    :meth:`add_row`.

    Parameters
    ----------
    left : ndarray, shape (m, r)
    singular_values : ndarray, shape (r,)
    right : ndarray, shape (n, r)
    squared_error : float
    reorth_every : int or None
        Re-orthogonalize both singular-vector bases every this many rows.
        Off by default.
    """

    def __init__(self, left, singular_values, right, squared_error=0.0,
                 reorth_every=None, check=True):
        self.left = np.asarray(left, dtype=np.float64)
        self.singular_values = np.asarray(singular_values, dtype=np.float64)
        self.right = np.asarray(right, dtype=np.float64)
        self.squared_error = float(squared_error)
        self.reorth_every = reorth_every
        self.rows_added = 0
        r = self.singular_values.shape[0]
        if self.left.ndim != 2 or self.right.ndim != 2:
            raise ValueError("singular vector blocks must be matrices")
        if self.left.shape[1] != r or self.right.shape[1] != r:
            raise ValueError(
                f"shape mismatch: left {self.left.shape}, "
                f"{r} singular values, right {self.right.shape}"
            )
        if check:
            if np.any(self.singular_values <= 0) or np.any(
                np.diff(self.singular_values) > 0
            ):
                raise ValueError("singular values must be positive and descending")
            for name, m in (("left", self.left), ("right", self.right)):
                err = _orthonormality_error(m)
                if err > ORTHO_TOL:
                    raise ValueError(f"{name} vectors not orthonormal (error {err:.2e})")

    @classmethod
    def empty(cls, n, **kwargs):
        """State for a matrix with zero rows and `n` columns."""
        return cls(np.zeros((0, 0)), np.zeros(0), np.zeros((n, 0)), 0.0, **kwargs)

    @property
    def m(self):
        return self.left.shape[0]

    @property
    def n(self):
        return self.right.shape[0]

    @property
    def r(self):
        return self.singular_values.shape[0]

    def matrix(self):
        """Materialize the current approximation (test-scale only)."""
        return (self.left * self.singular_values) @ self.right.T

    def add_row(self, b, abs_tol):
        """Append row `b`, truncating the inner SVD at absolute error `abs_tol`.

        Returns the energy discarded by this step.
        """
        b = np.asarray(b, dtype=np.float64).ravel()
        if b.shape[0] != self.n:
            raise ValueError(f"row has length {b.shape[0]}, expected {self.n}")
        if abs_tol < 0:
            raise ValueError("tolerance must be nonnegative")
        r = self.r
        p = self.right.T @ b
        e = b - self.right @ p
        k = float(np.linalg.norm(e))
        bnorm = float(np.linalg.norm(b))

        if k > ORTH_EPS * bnorm:
            middle = np.zeros((r + 1, r + 1))
            middle[r, r] = k
            basis = np.hstack([self.right, (e / k)[:, None]])
            skipped = 0.0
        else:
            # The residual is numerically zero: no new right direction.
            middle = np.zeros((r + 1, r))
            basis = self.right
            skipped = k * k
        middle[np.arange(r), np.arange(r)] = self.singular_values
        middle[r, :r] = p

        inner = small_svd_truncated(middle, abs_tol)
        left = np.empty((self.m + 1, inner.left.shape[1]))
        left[:-1] = self.left @ inner.left[:r]
        left[-1] = inner.left[r]
        self.left = left
        self.singular_values = inner.singular_values
        self.right = basis @ inner.right
        step_error = inner.discarded_sq + skipped
        self.squared_error += step_error
        self.rows_added += 1
        if self.reorth_every and self.rows_added % self.reorth_every == 0:
            self.reorthogonalize()
        return step_error

    def reorthogonalize(self):
        """Restore orthonormal bases via QR plus a small SVD of the coupling."""
        if self.r == 0:
            return
        qp, rp = np.linalg.qr(self.left)
        qq, rq = np.linalg.qr(self.right)
        u, s, vt = np.linalg.svd((rp * self.singular_values) @ rq.T)
        keep = s > 0
        self.left = qp @ u[:, keep]
        self.singular_values = s[keep]
        self.right = qq @ vt[keep].T

    def orthogonality_error(self):
        """Largest deviation of ``left^T left`` and ``right^T right`` from I."""
        return max(_orthonormality_error(self.left),
                   _orthonormality_error(self.right))

    def copy(self):
        out = ISVDState(self.left.copy(), self.singular_values.copy(),
                        self.right.copy(), self.squared_error,
                        reorth_every=self.reorth_every, check=False)
        out.rows_added = self.rows_added
        return out


def isvd_init(left, singular_values, right, initial_sq_error=0.0, **kwargs):
    """Wrap an existing truncated SVD in an :class:`ISVDState`."""
    return ISVDState(left, singular_values, right, initial_sq_error, **kwargs)


def isvd_error_trace(rows, rel_tol, state=None, initial=None):
    """Stream `rows` through an ISVD and compare both sides of the error identity.

    Each row ``b`` is absorbed with threshold ``rel_tol * ||b||``.  After every
    row, ``lhs`` is the error of the materialized matrix against the
    factorization and ``rhs`` the tracked ``squared_error``.

    Parameters
    ----------
    rows : sequence of 1-d arrays
    rel_tol : float
    state : ISVDState, optional
        Starting factorization; its matrix `initial` must then be supplied.
    initial : ndarray, optional
        The exact matrix that `state` approximates.

    Returns
    -------
    lhs, rhs : ndarray
    """
    rows = [np.asarray(b, dtype=np.float64) for b in rows]
    if state is None:
        state = ISVDState.empty(rows[0].shape[0])
        initial = np.zeros((0, rows[0].shape[0]))
    a = np.asarray(initial, dtype=np.float64)
    lhs, rhs = [], []
    for b in rows:
        state.add_row(b, rel_tol * np.linalg.norm(b))
        a = np.vstack([a, b])
        diff = a - state.matrix()
        lhs.append(float(np.sum(diff * diff)))
        rhs.append(state.squared_error)
    return np.array(lhs), np.array(rhs)


def isvd_error_identity_check(rows, rel_tol):
    """Final ``(lhs, rhs)`` of :func:`isvd_error_trace` from an empty state."""
    lhs, rhs = isvd_error_trace(rows, rel_tol)
    return lhs[-1], rhs[-1]
