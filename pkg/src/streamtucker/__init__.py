"""Batch and streaming Tucker compression of dense tensors (ST-HOSVD)."""

from .datagen import SineSpec, add_noise, noisy_slices, sine_slice, sine_tensor
from .isvd import ISVDState, isvd_error_identity_check, isvd_error_trace, isvd_init
from .linalg import (
    EigenResult,
    SmallSVD,
    gram,
    jacobi_eigh,
    small_svd_truncated,
    sym_eig_desc,
    truncation_rank,
)
from .sthosvd import TuckerModel, compression_ratio, reconstruct, relative_error, sthosvd
from .streaming import (
    StreamingState,
    estimate_relative_error,
    process_nonstreaming_mode,
    stream_init,
    stream_update,
)
from .tensor import (
    concat_along_mode,
    fold,
    frobenius_norm,
    pad_with_zeros,
    ttm,
    unfold,
    vectorize,
)

__version__ = "0.1.0"
