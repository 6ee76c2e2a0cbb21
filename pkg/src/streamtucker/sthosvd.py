"""Batch sequentially truncated HOSVD and the Tucker model container."""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .linalg import gram, sym_eig_desc, truncation_rank
from .tensor import as_tensor, frobenius_norm, multi_ttm, ttm, unfold

__all__ = [
    "TuckerModel",
    "ModeStep",
    "sthosvd",
    "reconstruct",
    "relative_error",
    "compression_ratio",
    "check_tau",
]

log = logging.getLogger(__name__)


@dataclass
class TuckerModel:
    """Core tensor plus one orthonormal factor per mode.

    ``factors[k]`` has shape ``(N_k, R_k)`` and ``core`` has shape
    ``(R_0, ..., R_{d-1})``.
    """

    core: np.ndarray
    factors: List[np.ndarray]
    tau: float
    mode_order: tuple = field(default=None)

    def __post_init__(self):
        if self.mode_order is None:
            self.mode_order = tuple(range(len(self.factors)))
        self.mode_order = tuple(int(k) for k in self.mode_order)
        if self.core.ndim != len(self.factors):
            raise ValueError("core order does not match the number of factors")
        for k, u in enumerate(self.factors):
            if u.shape[1] != self.core.shape[k]:
                raise ValueError(
                    f"factor {k} has {u.shape[1]} columns, core mode size is "
                    f"{self.core.shape[k]}"
                )
            if u.shape[1] > u.shape[0]:
                raise ValueError(f"factor {k} has more columns than rows")
        if sorted(self.mode_order) != list(range(len(self.factors))):
            raise ValueError(f"mode_order {self.mode_order} is not a permutation")

    @property
    def ndim(self):
        return self.core.ndim

    @property
    def dims(self):
        return tuple(u.shape[0] for u in self.factors)

    @property
    def ranks(self):
        return tuple(self.core.shape)

    @property
    def nbytes(self):
        return self.core.nbytes + sum(u.nbytes for u in self.factors)


class ModeStep(NamedTuple):
    """What one pass of the mode loop decided."""

    mode: int
    eigenvalues: np.ndarray
    rank: int
    discarded: float


def check_tau(tau):
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tolerance must lie in (0, 1), got {tau}")


def sthosvd(x, tau, mode_order: Optional[Sequence[int]] = None,
            return_trace=False, eig_method="lapack"):
    """Compress `x` with ST-HOSVD at relative tolerance `tau`.

    Each mode, in `mode_order`, gets a factor from the Gram eigendecomposition
    of the current partial core.  The per-mode budget ``tau * ||x|| / sqrt(d)``
    makes the final relative error at most `tau`.

    Parameters
    ----------
    x : array_like
        Dense data tensor.
    tau : float
        Relative Frobenius tolerance in (0, 1).
    mode_order : sequence of int, optional
        Order in which modes are truncated, default ``0, ..., d-1``.
    return_trace : bool
        Also return the list of :class:`ModeStep` records.
    eig_method : str
        Passed through to :func:`streamtucker.linalg.sym_eig_desc`.

    Returns
    -------
    TuckerModel, or (TuckerModel, list of ModeStep)
    """
    check_tau(tau)
    x = as_tensor(x)
    d = x.ndim
    order = tuple(range(d)) if mode_order is None else tuple(mode_order)
    if sorted(order) != list(range(d)):
        raise ValueError(f"mode_order {order} is not a permutation of 0..{d - 1}")

    norm = frobenius_norm(x)
    if norm == 0.0:
        log.warning("input tensor is identically zero; returning a rank-1 model")
        factors = [np.eye(n, 1, order="F") for n in x.shape]
        model = TuckerModel(np.zeros((1,) * d, order="F"), factors, tau, order)
        trace = [ModeStep(k, np.zeros(x.shape[k]), 1, 0.0) for k in order]
        return (model, trace) if return_trace else model

    delta = tau * norm / np.sqrt(d)
    core = x
    factors: List[Optional[np.ndarray]] = [None] * d
    trace = []
    for k in order:
        eig = sym_eig_desc(gram(unfold(core, k)), method=eig_method)
        rank = truncation_rank(eig.eigenvalues, delta)
        u = np.asfortranarray(eig.eigenvectors[:, :rank])
        factors[k] = u
        core = ttm(core, k, u, transpose=True)
        discarded = float(np.sum(eig.eigenvalues[rank:][::-1]))
        trace.append(ModeStep(k, eig.eigenvalues, rank, discarded))
        log.debug("mode %d: rank %d, discarded energy %.3e", k, rank, discarded)

    model = TuckerModel(np.asfortranarray(core), factors, tau, order)
    return (model, trace) if return_trace else model


def reconstruct(model, mode_order=None):
    """Expand a Tucker model back to a dense tensor."""
    out = model.core
    order = range(model.ndim) if mode_order is None else mode_order
    for k in order:
        out = ttm(out, k, model.factors[k])
    return np.asfortranarray(out)


def relative_error(x, model):
    """``||x - reconstruct(model)||_F / ||x||_F``."""
    x = as_tensor(x)
    if x.shape != model.dims:
        raise ValueError(f"tensor shape {x.shape} does not match model {model.dims}")
    approx = reconstruct(model)
    norm = frobenius_norm(x)
    err = frobenius_norm(x - approx)
    if norm == 0.0:
        if err == 0.0:
            return 0.0
        raise ValueError("relative error undefined for a zero tensor")
    return err / norm


def compression_ratio(model):
    """Raw element count over Tucker storage count."""
    dims = model.dims
    ranks = model.ranks
    raw = float(np.prod(dims, dtype=np.float64))
    stored = float(np.prod(ranks, dtype=np.float64)) + sum(
        n * r for n, r in zip(dims, ranks)
    )
    return raw / stored


def project(x, model):
    """Core of `x` in the model's bases (``x x_k U_k^T`` over all modes)."""
    return multi_ttm(x, model.factors, transpose=True)
