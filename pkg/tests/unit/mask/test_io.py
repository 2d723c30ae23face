"""Unit tests for the binary mask file format."""

from pathlib import Path

import numpy as np
import pytest

from mdt_workbench.layer.errors import FormatError, InputValidationError
from mdt_workbench.mask.io import decode_mask, encode_mask, read_mask, write_mask
from mdt_workbench.models.masks import BinaryMask


@pytest.fixture
def mask() -> BinaryMask:
    """A 3 x 5 mask with a delta companion (15 bits, not byte aligned)."""
    rng = np.random.default_rng(1)
    return BinaryMask(values=rng.random((3, 5)) > 0.5, delta=rng.random((3, 5)) > 0.5)


@pytest.mark.unit
class TestMaskFiles:
    """Test MASK encoding and decoding."""

    def test_file_preserves_bits(self, tmp_path: Path, mask: BinaryMask) -> None:
        """Test static and delta bits survive a write and read."""
        write_mask(tmp_path / "m" / "x.mask", mask)
        loaded = read_mask(tmp_path / "m" / "x.mask")
        np.testing.assert_array_equal(loaded.values, mask.values)
        np.testing.assert_array_equal(loaded.delta, mask.delta)

    def test_without_delta(self, mask: BinaryMask) -> None:
        """Test the has_delta flag and payload size."""
        payload = encode_mask(BinaryMask(values=mask.values))
        assert payload[12] == 0
        assert len(payload) == 13 + 2
        assert decode_mask(payload).delta is None

    def test_bad_magic(self, mask: BinaryMask) -> None:
        """Test a wrong magic is reported."""
        with pytest.raises(FormatError, match="magic"):
            decode_mask(b"NOPE" + encode_mask(mask)[4:])

    def test_bad_flag(self, mask: BinaryMask) -> None:
        """Test a has_delta byte other than 0 or 1."""
        payload = bytearray(encode_mask(mask))
        payload[12] = 2
        with pytest.raises(FormatError, match="has_delta"):
            decode_mask(bytes(payload))

    def test_truncated(self, mask: BinaryMask) -> None:
        """Test a payload shorter than its header implies."""
        with pytest.raises(FormatError, match="size mismatch"):
            decode_mask(encode_mask(mask)[:-1])

    def test_empty_mask_not_written(self) -> None:
        """Test masks without frames cannot be encoded."""
        with pytest.raises(InputValidationError):
            encode_mask(BinaryMask(values=np.zeros((0, 3), dtype=bool)))
