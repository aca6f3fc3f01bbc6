"""
IDX binary tensor container

Layout (all integers big-endian)::

    offset 0   two zero bytes
    offset 2   type code (0x08 u1, 0x09 i1, 0x0B i2, 0x0C i4, 0x0D f4, 0x0E f8)
    offset 3   rank r
    offset 4   r 32-bit dimension sizes
    then       the elements in row-major order

Gzip-wrapped files are recognized by their magic bytes and unpacked first.
"""

import gzip
import math
import zlib
from pathlib import Path
from typing import Optional, Union

import numpy as np

from numeric_core import ArgumentError

GZIP_MAGIC = b"\x1f\x8b"

IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
_TYPE_CODES = {(dtype.kind, dtype.itemsize): code for code, dtype in IDX_TYPES.items()}


class IdxParseError(ValueError):
    """Malformed IDX data; ``offset`` is the byte position of the problem"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def parse_idx(data: bytes) -> np.ndarray:
    """Decode an IDX byte string into a native-endian array of its own type"""
    data = bytes(data)
    if data[:2] == GZIP_MAGIC:
        try:
            data = gzip.decompress(data)
        except (OSError, EOFError, zlib.error) as exc:
            raise IdxParseError(f"Corrupt gzip container: {exc}", 0) from exc
    if len(data) < 4:
        raise IdxParseError("Truncated magic number", len(data))
    if data[0] != 0 or data[1] != 0:
        raise IdxParseError("Bad magic number", 0)
    code = data[2]
    if code not in IDX_TYPES:
        raise IdxParseError(f"Unsupported type code 0x{code:02X}", 2)
    rank = data[3]
    if rank == 0:
        raise IdxParseError("Rank must be at least 1", 3)

    header_end = 4 + 4 * rank
    if len(data) < header_end:
        raise IdxParseError("Truncated dimension sizes", len(data))
    dims = tuple(int(v) for v in np.frombuffer(data, dtype=">u4", count=rank, offset=4))

    dtype = IDX_TYPES[code]
    count = math.prod(dims)
    end = header_end + count * dtype.itemsize
    if count * dtype.itemsize > np.iinfo(np.intp).max:
        raise IdxParseError("Dimension product too large", 4)
    if len(data) < end:
        raise IdxParseError(f"Truncated payload, expected {end} bytes", len(data))
    if len(data) > end:
        raise IdxParseError("Trailing bytes after payload", end)

    if count == 0:
        return np.zeros(dims, dtype=dtype.newbyteorder("="))
    values = np.frombuffer(data, dtype=dtype, count=count, offset=header_end)
    return values.reshape(dims).astype(dtype.newbyteorder("="))


def encode_idx(array, type_code: Optional[int] = None) -> bytes:
    """Encode an array as IDX; the type code follows the dtype unless given"""
    array = np.asarray(array)
    if array.ndim == 0 or array.ndim > 255:
        raise ArgumentError(f"IDX needs rank 1..255, got {array.ndim}")
    if type_code is None:
        type_code = _TYPE_CODES.get((array.dtype.kind, array.dtype.itemsize))
        if type_code is None:
            raise ArgumentError(f"No IDX type code for dtype {array.dtype}")
    if type_code not in IDX_TYPES:
        raise ArgumentError(f"Unsupported type code 0x{type_code:02X}")
    header = bytes([0, 0, type_code, array.ndim])
    dims = np.asarray(array.shape, dtype=">u4").tobytes()
    payload = np.ascontiguousarray(array, dtype=IDX_TYPES[type_code]).tobytes()
    return header + dims + payload


def load_idx_file(path: Union[str, Path]) -> np.ndarray:
    return parse_idx(Path(path).read_bytes())
