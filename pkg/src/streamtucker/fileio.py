"""Binary tensor files and stream checkpoints.

Tensor file (little-endian)::

    8s   magic "TUCKTNSR"
    u32  version (1)
    u32  ndims
    u64  dims[ndims]
    f64  payload[prod(dims)], mode 0 fastest

Checkpoint file (little-endian)::

    8s   magic "TUCKCKPT"
    u32  version (1)
    u32  d
    u32  flags            bit 0: streaming state follows
    f64  tau
    u32  mode_order[d]
    u64  dims[d]
    u64  ranks[d]
    f64  core[prod(ranks)]
    f64  factor_k[dims[k] * ranks[k]]   for k = 0..d-1, column major
    -- when bit 0 of flags is set --
    u64  n_d
    f64  norm_sq, error_sq, isvd_squared_error
    u64  rows_added
    u64  r, n
    f64  singular_values[r]
    f64  right[n * r], column major

The streaming-mode factor doubles as the ISVD left vectors, so it is stored
once.  Every writer goes through a temporary file and an atomic rename.
"""

import os
import struct
import tempfile

import numpy as np

from .isvd import ISVDState
from .sthosvd import TuckerModel

__all__ = [
    "TensorFileError",
    "BadMagicError",
    "TruncatedPayloadError",
    "VersionMismatchError",
    "read_tensor",
    "write_tensor",
    "save_checkpoint",
    "load_checkpoint",
    "atomic_write",
]

TENSOR_MAGIC = b"TUCKTNSR"
CHECKPOINT_MAGIC = b"TUCKCKPT"
VERSION = 1
_F64 = np.dtype("<f8")


class TensorFileError(ValueError):
    """Base class for malformed files."""


class BadMagicError(TensorFileError):
    pass


class TruncatedPayloadError(TensorFileError):
    pass


class VersionMismatchError(TensorFileError):
    pass


def atomic_write(path, data):
    """Write `data` to `path` via a sibling temp file and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Reader:
    def __init__(self, buf, path):
        self.buf = memoryview(buf)
        self.pos = 0
        self.path = path

    def take(self, n):
        if self.pos + n > len(self.buf):
            raise TruncatedPayloadError(f"{self.path}: truncated payload")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))

    def floats(self, count, shape=None):
        arr = np.frombuffer(self.take(8 * count), dtype=_F64).astype(np.float64)
        if shape is not None:
            arr = arr.reshape(shape, order="F")
        return arr

    def header(self, magic):
        got = bytes(self.take(len(magic))) if len(self.buf) >= len(magic) else b""
        if got != magic:
            raise BadMagicError(f"{self.path}: bad magic {got!r}, expected {magic!r}")
        (version,) = self.unpack("<I")
        if version != VERSION:
            raise VersionMismatchError(
                f"{self.path}: version {version} not supported (expected {VERSION})"
            )


def _floats_bytes(a):
    return np.asarray(a, dtype=_F64).tobytes(order="F")


def encode_tensor(t):
    t = np.asarray(t, dtype=np.float64)
    parts = [TENSOR_MAGIC, struct.pack("<II", VERSION, t.ndim),
             struct.pack(f"<{t.ndim}Q", *t.shape), _floats_bytes(t)]
    return b"".join(parts)


def write_tensor(path, t):
    """Write `t` as a tensor file."""
    atomic_write(path, encode_tensor(t))


def read_tensor(path):
    """Read a tensor file; raises a :class:`TensorFileError` subclass if malformed."""
    with open(path, "rb") as fh:
        buf = fh.read()
    rd = _Reader(buf, path)
    rd.header(TENSOR_MAGIC)
    (ndims,) = rd.unpack("<I")
    dims = rd.unpack(f"<{ndims}Q")
    out = rd.floats(int(np.prod(dims, dtype=np.int64)), dims)
    if rd.pos != len(rd.buf):
        raise TensorFileError(f"{path}: {len(rd.buf) - rd.pos} trailing bytes")
    return np.asfortranarray(out)


def encode_checkpoint(model, state=None):
    d = model.ndim
    parts = [
        CHECKPOINT_MAGIC,
        struct.pack("<III", VERSION, d, 1 if state is not None else 0),
        struct.pack("<d", model.tau),
        struct.pack(f"<{d}I", *model.mode_order),
        struct.pack(f"<{d}Q", *model.dims),
        struct.pack(f"<{d}Q", *model.ranks),
        _floats_bytes(model.core),
    ]
    parts += [_floats_bytes(u) for u in model.factors]
    if state is not None:
        isvd = state.isvd
        parts += [
            struct.pack("<Q", state.n_d),
            struct.pack("<ddd", state.norm_sq, state.error_sq, isvd.squared_error),
            struct.pack("<QQQ", isvd.rows_added, isvd.r, isvd.n),
            _floats_bytes(isvd.singular_values),
            _floats_bytes(isvd.right),
        ]
    return b"".join(parts)


def save_checkpoint(path, model, state=None):
    """Persist a Tucker model, plus the streaming state when given."""
    atomic_write(path, encode_checkpoint(model, state))


def load_checkpoint(path):
    """Return ``(model, state)``; `state` is None for model-only files."""
    from .streaming import StreamingState

    with open(path, "rb") as fh:
        buf = fh.read()
    rd = _Reader(buf, path)
    rd.header(CHECKPOINT_MAGIC)
    d, flags = rd.unpack("<II")
    (tau,) = rd.unpack("<d")
    order = rd.unpack(f"<{d}I")
    dims = rd.unpack(f"<{d}Q")
    ranks = rd.unpack(f"<{d}Q")
    core = np.asfortranarray(rd.floats(int(np.prod(ranks, dtype=np.int64)), ranks))
    factors = [np.asfortranarray(rd.floats(n * r, (n, r))) for n, r in zip(dims, ranks)]
    model = TuckerModel(core, factors, tau, order)
    state = None
    if flags & 1:
        (n_d,) = rd.unpack("<Q")
        norm_sq, error_sq, isvd_err = rd.unpack("<ddd")
        rows_added, r, n = rd.unpack("<QQQ")
        s = rd.floats(r)
        right = rd.floats(n * r, (n, r))
        isvd = ISVDState(factors[-1], s, right, isvd_err, check=False)
        isvd.rows_added = rows_added
        state = StreamingState(model, isvd, n_d, tau, norm_sq, error_sq)
    if rd.pos != len(rd.buf):
        raise TensorFileError(f"{path}: {len(rd.buf) - rd.pos} trailing bytes")
    return model, state
