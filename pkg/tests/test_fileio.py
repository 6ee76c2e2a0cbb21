import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamtucker import fileio
from streamtucker.sthosvd import sthosvd
from streamtucker.streaming import stream_init, stream_update


def test_tensor_round_trip(tmp_path):
    t = np.random.default_rng(0).standard_normal((3, 4, 5))
    path = tmp_path / "t.tns"
    fileio.write_tensor(path, t)
    back = fileio.read_tensor(path)
    np.testing.assert_array_equal(back, t)
    assert back.shape == (3, 4, 5)


def test_header_layout(tmp_path):
    t = np.arange(6.0).reshape((2, 3), order="F")
    path = tmp_path / "t.tns"
    fileio.write_tensor(path, t)
    raw = path.read_bytes()
    assert raw[:8] == b"TUCKTNSR"
    assert struct.unpack("<II", raw[8:16]) == (1, 2)
    assert struct.unpack("<QQ", raw[16:32]) == (2, 3)
    # Payload is mode 0 fastest, little-endian doubles.
    np.testing.assert_array_equal(np.frombuffer(raw[32:], dtype="<f8"), np.arange(6.0))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.integers(0, 1000))
def test_round_trip_property(tmp_path_factory, shape, seed):
    t = np.random.default_rng(seed).standard_normal(shape)
    path = tmp_path_factory.mktemp("rt") / "x.tns"
    fileio.write_tensor(path, t)
    np.testing.assert_array_equal(fileio.read_tensor(path), t)


def test_truncated(tmp_path):
    path = tmp_path / "t.tns"
    fileio.write_tensor(path, np.ones((3, 3)))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(fileio.TruncatedPayloadError):
        fileio.read_tensor(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "t.tns"
    path.write_bytes(b"NOTATENS" + bytes(16))
    with pytest.raises(fileio.BadMagicError):
        fileio.read_tensor(path)
    path.write_bytes(b"TU")
    with pytest.raises(fileio.BadMagicError):
        fileio.read_tensor(path)


def test_version_mismatch(tmp_path):
    path = tmp_path / "t.tns"
    fileio.write_tensor(path, np.ones(2))
    raw = bytearray(path.read_bytes())
    raw[8:12] = struct.pack("<I", 2)
    path.write_bytes(bytes(raw))
    with pytest.raises(fileio.VersionMismatchError):
        fileio.read_tensor(path)


def test_errors_are_distinct():
    kinds = {fileio.BadMagicError, fileio.TruncatedPayloadError, fileio.VersionMismatchError}
    assert len(kinds) == 3
    assert all(issubclass(k, fileio.TensorFileError) for k in kinds)


def test_no_temp_files_left(tmp_path):
    fileio.write_tensor(tmp_path / "a.tns", np.ones(3))
    assert [p.name for p in tmp_path.iterdir()] == ["a.tns"]


def test_model_checkpoint_round_trip(tmp_path):
    x = np.random.default_rng(1).standard_normal((4, 5, 6))
    model = sthosvd(x, 0.3, mode_order=(1, 0, 2))
    path = tmp_path / "m.ckpt"
    fileio.save_checkpoint(path, model)
    back, state = fileio.load_checkpoint(path)
    assert state is None
    assert back.tau == model.tau and back.mode_order == model.mode_order
    np.testing.assert_array_equal(back.core, model.core)
    for a, b in zip(back.factors, model.factors):
        np.testing.assert_array_equal(a, b)


def test_stream_checkpoint_round_trip(tmp_path):
    x = np.random.default_rng(2).standard_normal((4, 5, 10))
    state = stream_init(x[..., :5], 0.3)
    for i in range(5, 8):
        stream_update(state, x[..., i])
    path = tmp_path / "s.ckpt"
    fileio.save_checkpoint(path, state.model, state)
    _, back = fileio.load_checkpoint(path)
    assert back.n_d == state.n_d and back.ranks == state.ranks
    assert back.error_sq == state.error_sq and back.norm_sq == state.norm_sq
    assert back.isvd.squared_error == state.isvd.squared_error
    np.testing.assert_array_equal(back.isvd.singular_values, state.isvd.singular_values)
    np.testing.assert_array_equal(back.isvd.right, state.isvd.right)
    np.testing.assert_array_equal(back.isvd.left, state.isvd.left)
    assert back.coupling_error() <= 1e-12
    # Both copies continue alike; memory layout may differ, so allow rounding.
    for i in range(8, 10):
        stream_update(state, x[..., i])
        stream_update(back, x[..., i])
    gap = np.linalg.norm(back.model.core - state.model.core)
    assert gap <= 1e-12 * np.linalg.norm(state.model.core)


def test_truncated_checkpoint(tmp_path):
    model = sthosvd(np.random.default_rng(3).standard_normal((3, 3, 3)), 0.5)
    path = tmp_path / "m.ckpt"
    fileio.save_checkpoint(path, model)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(fileio.TruncatedPayloadError):
        fileio.load_checkpoint(path)
