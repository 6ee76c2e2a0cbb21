"""Streaming ST-HOSVD: absorb one (d-1)-way slice at a time.

The last mode is the streaming mode.  Alongside the Tucker model the state
keeps an incremental SVD of the core's streaming-mode unfolding,
``unfold(core, d-1) = diag(S) @ V.T``, so the data tensor itself is never
needed after initialization.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .isvd import ISVDState
from .linalg import gram, sym_eig_desc, truncation_rank
from .memtrack import track_peak
from .sthosvd import TuckerModel, check_tau, reconstruct, sthosvd
from .tensor import (
    as_tensor,
    concat_along_mode,
    frobenius_norm,
    pad_with_zeros,
    ttm,
    unfold,
    vectorize,
)

__all__ = [
    "StepRecord",
    "StreamingState",
    "stream_init",
    "stream_update",
    "process_nonstreaming_mode",
    "estimate_relative_error",
    "CouplingError",
]

log = logging.getLogger(__name__)

COUPLING_TOL = 1e-8


class CouplingError(RuntimeError):
    """Core and ``V x_d diag(S)`` drifted apart."""


@dataclass
class StepRecord:
    step: int
    n_d: int
    ranks: tuple
    peak_bytes: int
    wall_ms: float
    slice_norm: float
    residual_norms: tuple
    error_estimate: float


@dataclass
class StreamingState:
    """Everything needed to keep absorbing slices.

    ``isvd.left`` is the same array as ``model.factors[-1]``; ``isvd.right``
    is the streaming-mode unfolding of the auxiliary tensor ``V``, transposed.
    """

    model: TuckerModel
    isvd: ISVDState
    n_d: int
    tau: float
    norm_sq: float
    error_sq: float
    metrics: List[StepRecord] = field(default_factory=list)
    init_peak_bytes: int = 0
    check: bool = True

    @property
    def d(self):
        return self.model.ndim

    @property
    def ranks(self):
        return self.model.ranks

    @property
    def slice_dims(self):
        return self.model.dims[:-1]

    @property
    def v_tensor(self):
        """Auxiliary tensor ``V`` with ``core = V x_d diag(S)``."""
        shape = self.model.core.shape[:-1] + (self.isvd.r,)
        return self.isvd.right.reshape(shape, order="F")

    def coupling_error(self):
        """Relative gap between the core and ``V x_d diag(S)``."""
        core = self.model.core
        other = ttm(self.v_tensor, self.d - 1, np.diag(self.isvd.singular_values))
        scale = frobenius_norm(core)
        gap = frobenius_norm(core - other)
        return gap / scale if scale > 0 else gap

    def reconstruct(self):
        return reconstruct(self.model)

    @property
    def peak_bytes(self):
        steps = max((m.peak_bytes for m in self.metrics), default=0)
        return max(self.init_peak_bytes, steps)

    def _resident(self):
        return [self.model.core, self.isvd.right, *self.model.factors]


def stream_init(x_init, tau, mode_order: Optional[Sequence[int]] = None,
                track_memory=False, check=True, reorth_every=None):
    """Start a stream from an initial batch with batch ST-HOSVD.

    Parameters
    ----------
    x_init : array_like
        Initial d-way batch, streaming mode last.
    tau : float
        Relative tolerance kept for the whole stream.
    mode_order : sequence of int, optional
        Mode processing order; the streaming mode must come last.
    track_memory : bool
        Record allocation peaks (slows things down a little).
    check : bool
        Verify the core/ISVD coupling after every update.
    reorth_every : int, optional
        Forwarded to :class:`~streamtucker.isvd.ISVDState`.
    """
    check_tau(tau)
    x_init = as_tensor(x_init)
    d = x_init.ndim
    if d < 2:
        raise ValueError("streaming needs at least two modes")
    order = tuple(range(d)) if mode_order is None else tuple(mode_order)
    if order[-1] != d - 1:
        raise ValueError("the streaming mode must be processed last")

    with track_peak(x_init, enabled=track_memory) as usage:
        norm_sq = frobenius_norm(x_init) ** 2
        if norm_sq == 0.0:
            raise ValueError("initial batch has zero norm")
        model, trace = sthosvd(x_init, tau, order, return_trace=True)
        core_d = unfold(model.core, d - 1)
        s = np.linalg.norm(core_d, axis=1)
        right = (core_d / s[:, None]).T
        initial_err = sum(step.discarded for step in trace)
        isvd = ISVDState(model.factors[-1], s, right, initial_err,
                         reorth_every=reorth_every, check=False)

    state = StreamingState(model, isvd, x_init.shape[-1], tau, norm_sq,
                           initial_err, init_peak_bytes=usage.peak_bytes,
                           check=check)
    log.info("stream initialized from %d slices, ranks %s",
             state.n_d, state.ranks)
    return state


def process_nonstreaming_mode(state, y, k, delta):
    """Synchronize mode `k` of the model with the partially projected slice.

    Returns the slice projected onto the (possibly expanded) mode-`k` basis and
    the norm of the error left behind in this mode.  When the part of `y`
    outside the current basis exceeds `delta`, the basis grows by the
    dominant directions of that part and the core and ``V`` get zero padding.
    """
    model = state.model
    u = model.factors[k]
    p = ttm(y, k, u, transpose=True)
    e = y - ttm(p, k, u)
    e_norm = frobenius_norm(e)
    room = u.shape[0] - u.shape[1]
    if e_norm <= delta or room == 0:
        return p, e_norm

    eig = sym_eig_desc(gram(unfold(e, k)))
    extra = min(truncation_rank(eig.eigenvalues, delta), room)
    w = eig.eigenvectors[:, :extra]
    # One more projection keeps the new columns orthogonal to u in floating point.
    w = w - u @ (u.T @ w)
    w, _ = np.linalg.qr(w)
    kk = ttm(e, k, w, transpose=True)
    residual = frobenius_norm(e - ttm(kk, k, w))

    v = state.v_tensor
    model.core = pad_with_zeros(model.core, k, extra)
    v = pad_with_zeros(v, k, extra)
    state.isvd.right = v.reshape(-1, v.shape[-1], order="F")
    model.factors[k] = np.asfortranarray(np.hstack([u, w]))
    log.debug("mode %d grew from %d to %d", k, u.shape[1], u.shape[1] + extra)
    return concat_along_mode(k, p, kk), residual


def stream_update(state, y, track_memory=False):
    """Absorb slice `y` (shape ``N_0 x ... x N_{d-2}``) into `state` in place."""
    start = time.perf_counter()
    y = as_tensor(y)
    if y.shape != state.slice_dims:
        raise ValueError(f"slice shape {y.shape} != expected {state.slice_dims}")
    model, isvd = state.model, state.isvd
    d = state.d
    y_norm = frobenius_norm(y)
    residuals = []

    with track_peak(y, *state._resident(), enabled=track_memory) as usage:
        if y_norm == 0.0:
            isvd.left = np.vstack([isvd.left, np.zeros((1, isvd.r))])
            isvd.rows_added += 1
            model.factors[-1] = isvd.left
        else:
            delta = state.tau * y_norm / np.sqrt(d)
            for k in model.mode_order[:-1]:
                y, res = process_nonstreaming_mode(state, y, k, delta)
                residuals.append(res)

            old_left = isvd.left
            step_err = isvd.add_row(vectorize(y), delta)
            residuals.append(float(np.sqrt(step_err)))
            new_left = isvd.left
            n_d = state.n_d
            mix = new_left[:n_d].T @ old_left
            new_row = new_left[n_d][:, None]
            core = ttm(model.core, d - 1, mix)
            core += ttm(y.reshape(y.shape + (1,), order="F"), d - 1, new_row)
            model.core = core
            model.factors[-1] = new_left
            state.error_sq += sum(r * r for r in residuals)

    state.n_d += 1
    state.norm_sq += y_norm * y_norm
    if state.check and y_norm > 0.0:
        gap = state.coupling_error()
        if gap > COUPLING_TOL:
            raise CouplingError(
                f"core and V x_d S differ by {gap:.3e} (relative) after slice "
                f"{state.n_d}; tolerance {COUPLING_TOL}"
            )
    state.metrics.append(StepRecord(
        step=len(state.metrics) + 1,
        n_d=state.n_d,
        ranks=state.ranks,
        peak_bytes=usage.peak_bytes,
        wall_ms=(time.perf_counter() - start) * 1e3,
        slice_norm=y_norm,
        residual_norms=tuple(residuals),
        error_estimate=estimate_relative_error(state),
    ))
    return state


def estimate_relative_error(state):
    """Accumulated discarded energy over accumulated data energy, square-rooted."""
    if state.norm_sq == 0.0:
        return 0.0
    return float(np.sqrt(max(state.error_sq, 0.0) / state.norm_sq))
