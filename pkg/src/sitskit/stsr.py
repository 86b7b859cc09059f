"""STSR tensor container: a minimal portable binary array format.

Layout, everything little-endian:

    magic    4 bytes   b"STSR"
    version  u8        1
    dtype    u8        0=f32, 1=i32, 2=u16, 3=u8
    ndim     u8        1..8
    pad      u8        0
    shape    ndim x u64
    payload  row-major values

The header is exactly 8 + 8*ndim bytes, so the payload offset depends on
ndim alone. Save/load round-trips are bit-exact.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import CorruptionError, FormatError, ValidationError

MAGIC = b"STSR"
VERSION = 1
MAX_NDIM = 8

DTYPE_CODES = {
    np.dtype("<f4"): 0,
    np.dtype("<i4"): 1,
    np.dtype("<u2"): 2,
    np.dtype("u1"): 3,
}
CODE_DTYPES = {code: dt for dt, code in DTYPE_CODES.items()}


def header_size(ndim: int) -> int:
    return 8 + 8 * ndim


def save_tensor(array: np.ndarray, path: str | os.PathLike) -> None:
    """Write an array as an STSR file. Dtype must be f32/i32/u16/u8."""
    array = np.asarray(array)
    dtype = array.dtype.newbyteorder("<")
    if dtype not in DTYPE_CODES:
        raise ValidationError(f"unsupported dtype {array.dtype}; expected f32/i32/u16/u8")
    if not 1 <= array.ndim <= MAX_NDIM:
        raise ValidationError(f"ndim must be 1..{MAX_NDIM}, got {array.ndim}")
    if any(e < 1 for e in array.shape):
        raise ValidationError(f"every extent must be >= 1, got shape {array.shape}")
    payload = np.ascontiguousarray(array.astype(dtype, copy=False)).tobytes()
    header = struct.pack(
        "<4sBBBB", MAGIC, VERSION, DTYPE_CODES[dtype], array.ndim, 0
    ) + struct.pack(f"<{array.ndim}Q", *array.shape)
    tmp = f"{os.fspath(path)}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write tensor to {os.fspath(path)}: {exc}") from exc


def load_tensor(path: str | os.PathLike) -> np.ndarray:
    """Read an STSR file back into an array, verifying header and payload."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read tensor from {os.fspath(path)}: {exc}") from exc

    if len(blob) < 8 or blob[:4] != MAGIC:
        raise FormatError(f"{os.fspath(path)}: not an STSR file (bad magic)")
    version, dtype_code, ndim, pad = struct.unpack_from("<BBBB", blob, 4)
    if version != VERSION:
        raise FormatError(f"{os.fspath(path)}: unsupported STSR version {version}")
    if dtype_code not in CODE_DTYPES:
        raise FormatError(f"{os.fspath(path)}: unknown dtype code {dtype_code}")
    if not 1 <= ndim <= MAX_NDIM:
        raise FormatError(f"{os.fspath(path)}: ndim {ndim} outside 1..{MAX_NDIM}")
    offset = header_size(ndim)
    if len(blob) < offset:
        raise CorruptionError(f"{os.fspath(path)}: truncated header")
    shape = struct.unpack_from(f"<{ndim}Q", blob, 8)
    if any(e < 1 for e in shape):
        raise FormatError(f"{os.fspath(path)}: zero extent in shape {shape}")

    dtype = CODE_DTYPES[dtype_code]
    count = int(np.prod(shape, dtype=np.uint64))
    expected = offset + count * dtype.itemsize
    if len(blob) != expected:
        raise CorruptionError(
            f"{os.fspath(path)}: payload is {len(blob) - offset} bytes, "
            f"expected {expected - offset}"
        )
    return np.frombuffer(blob, dtype=dtype, offset=offset).reshape(shape).copy()
