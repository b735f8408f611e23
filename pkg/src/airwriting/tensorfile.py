"""Bit-exact binary tensor files.

Layout (all integers little-endian, independent of host byte order):

    magic   4 bytes  b"MYOT"
    version u16
    dtype   u8       0 = float32 little-endian
    ndim    u8
    dims    ndim x u64
    payload prod(dims) x f32, row-major
"""

import struct

import numpy as np

from .errors import BadMagic, IoError, TruncatedPayload

MAGIC = b"MYOT"
VERSION = 1
DTYPE_F32 = 0

_HEAD = struct.Struct("<HBB")  # version, dtype, ndim


def write_tensor(path_or_file, tensor) -> None:
    """Write ``tensor`` as a float32 little-endian MYOT file."""
    arr = np.asarray(tensor)
    if arr.ndim < 1:
        arr = arr.reshape(1)
    if arr.size == 0:
        raise IoError("refusing to write an empty tensor")
    if not np.all(np.isfinite(arr)):
        raise IoError("refusing to write non-finite values")
    payload = np.ascontiguousarray(arr, dtype="<f4")

    def _emit(fh):
        fh.write(MAGIC)
        fh.write(_HEAD.pack(VERSION, DTYPE_F32, payload.ndim))
        for d in payload.shape:
            fh.write(struct.pack("<Q", d))
        fh.write(payload.tobytes(order="C"))

    if hasattr(path_or_file, "write"):
        _emit(path_or_file)
    else:
        with open(path_or_file, "wb") as fh:
            _emit(fh)


def read_tensor(path_or_file) -> np.ndarray:
    """Read a MYOT file back as a float32 array (row-major)."""
    if hasattr(path_or_file, "read"):
        return _parse(path_or_file)
    try:
        with open(path_or_file, "rb") as fh:
            return _parse(fh)
    except OSError as exc:
        raise IoError(str(exc)) from exc


def _take(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise TruncatedPayload(f"short read in {what}: wanted {n} bytes, got {len(buf)}")
    return buf


def _parse(fh) -> np.ndarray:
    magic = fh.read(4)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}")
    version, dtype, ndim = _HEAD.unpack(_take(fh, _HEAD.size, "header"))
    if version != VERSION:
        raise BadMagic(f"unsupported version {version}")
    if dtype != DTYPE_F32:
        raise BadMagic(f"unknown dtype code {dtype}")
    if ndim < 1:
        raise BadMagic("ndim must be >= 1")
    dims = struct.unpack(f"<{ndim}Q", _take(fh, 8 * ndim, "dims"))
    count = 1
    for d in dims:
        if d == 0:
            raise BadMagic("zero-sized dimension")
        count *= d
    payload = _take(fh, 4 * count, "payload")
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
