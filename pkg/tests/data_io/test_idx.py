"""
Unit tests for the IDX tensor codec
"""

import gzip

import numpy as np
import pytest

from data_io import IdxParseError, encode_idx, load_idx_file, parse_idx
from numeric_core import ArgumentError


class TestParseIdx:
    """Test cases for parse_idx"""

    def test_cube(self, idx_cube_bytes):
        """Test a hand-encoded 2x2x2 tensor"""
        cube = parse_idx(idx_cube_bytes)
        assert cube.shape == (2, 2, 2)
        assert cube.dtype == np.uint8
        assert cube[1, 0, 1] == 6
        assert list(cube.reshape(-1)) == list(range(1, 9))

    def test_header_dimensions_big_endian(self):
        """Test 32-bit big-endian dimension sizes above 255"""
        data = bytes([0, 0, 0x08, 1]) + (300).to_bytes(4, "big") + bytes(300)
        assert parse_idx(data).shape == (300,)

    def test_gzip_transparent(self, idx_cube_bytes):
        """Test gzip-wrapped data decodes identically"""
        assert np.array_equal(parse_idx(gzip.compress(idx_cube_bytes)), parse_idx(idx_cube_bytes))

    def test_float_payload_native_endian(self):
        """Test big-endian float64 payloads come back native"""
        values = np.array([[1.5, -2.25], [1e300, 0.0]])
        data = bytes([0, 0, 0x0E, 2]) + np.array([2, 2], ">u4").tobytes() + values.astype(">f8").tobytes()
        decoded = parse_idx(data)
        assert decoded.dtype.isnative
        assert np.array_equal(decoded, values)

    def test_zero_sized_dimension(self):
        """Test a dimension of size zero gives an empty array"""
        data = bytes([0, 0, 0x08, 2]) + np.array([0, 5], ">u4").tobytes()
        assert parse_idx(data).shape == (0, 5)

    @pytest.mark.parametrize(
        "data,offset",
        [
            (b"", 0),
            (b"\x00\x00", 2),
            (b"\x01\x00\x08\x01", 0),
            (b"\x00\x00\x07\x01", 2),
            (b"\x00\x00\x08\x00", 3),
            (b"\x00\x00\x08\x02\x00\x00\x00\x01", 8),
            (b"\x00\x00\x08\x01\x00\x00\x00\x03\x01\x02", 10),
            (b"\x00\x00\x08\x01\x00\x00\x00\x01\x01\x02", 9),
            (b"\x1f\x8bnot gzip", 0),
        ],
    )
    def test_malformed(self, data, offset):
        """Test malformed inputs raise with the offending byte offset"""
        with pytest.raises(IdxParseError) as info:
            parse_idx(data)
        assert info.value.offset == offset
        assert isinstance(info.value, ValueError)

    def test_dimension_product_too_large(self):
        """Test a header whose element count cannot be addressed is refused at the dimensions"""
        data = bytes([0, 0, 0x08, 4]) + np.array([65536] * 4, ">u4").tobytes()
        with pytest.raises(IdxParseError, match="too large") as info:
            parse_idx(data)
        assert info.value.offset == 4

    def test_large_header_on_short_payload_is_truncation(self):
        """Test an addressable but unbacked element count reports truncation"""
        data = bytes([0, 0, 0x0D, 2]) + np.array([65536, 65536], ">u4").tobytes()
        with pytest.raises(IdxParseError, match="Truncated") as info:
            parse_idx(data)
        assert info.value.offset == len(data)


class TestEncodeIdx:
    """Test cases for encode_idx"""

    @pytest.mark.parametrize("dtype", ["u1", "i1", "i2", "i4", "f4", "f8"])
    def test_round_trip(self, dtype):
        """Test every element type survives encoding"""
        array = (np.arange(24).reshape(2, 3, 4) - 5).astype(dtype) if dtype != "u1" else np.arange(24, dtype="u1").reshape(2, 3, 4)
        decoded = parse_idx(encode_idx(array))
        assert decoded.dtype == np.dtype(dtype)
        assert np.array_equal(decoded, array)

    def test_unsupported_dtype(self):
        """Test dtypes with no IDX code are refused"""
        with pytest.raises(ArgumentError):
            encode_idx(np.zeros(3, dtype=np.int64))
        with pytest.raises(ArgumentError):
            encode_idx(np.float64(1.0))

    def test_load_file(self, tmp_path, idx_cube_bytes):
        """Test reading from disk"""
        path = tmp_path / "cube.idx"
        path.write_bytes(idx_cube_bytes)
        assert load_idx_file(path).shape == (2, 2, 2)
