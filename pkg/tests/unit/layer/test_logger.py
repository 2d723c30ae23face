"""Unit tests for the structured logger."""

import numpy as np
import orjson
import pytest

from mdt_workbench.layer.logger import StructuredLogger


def records(err: str) -> list[dict]:
    return [orjson.loads(line) for line in err.splitlines() if line.strip()]


@pytest.mark.unit
class TestStructuredLogger:
    """Test JSON records, bound context and timing."""

    def test_json_line_with_bound_context(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test a bound logger adds its fields to every record."""
        log = StructuredLogger("tests.logger.bound", level="DEBUG")
        log.bind(stage="decode").info("Decoded", words=np.int64(3))
        (record,) = records(capsys.readouterr().err)
        assert record["message"] == "Decoded"
        assert record["level"] == "INFO"
        assert record["logger"] == "tests.logger.bound"
        assert record["stage"] == "decode"
        assert record["words"] == 3

    def test_bind_does_not_leak(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test the parent keeps its own context."""
        log = StructuredLogger("tests.logger.parent", level="INFO")
        log.bind(band=4)
        log.info("Plain")
        (record,) = records(capsys.readouterr().err)
        assert "band" not in record

    def test_level_filters(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test records below the level are dropped."""
        log = StructuredLogger("tests.logger.level", level="WARNING")
        log.info("hidden")
        log.warning("shown")
        assert [r["message"] for r in records(capsys.readouterr().err)] == ["shown"]
        assert not log.is_enabled("info")

    def test_timed_records_elapsed(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test timed logs once on completion with the collected fields."""
        log = StructuredLogger("tests.logger.timed", level="INFO")
        with log.timed("Done", stage="train-hmm") as done:
            done["outputs"] = 2
        (record,) = records(capsys.readouterr().err)
        assert record["outputs"] == 2
        assert record["stage"] == "train-hmm"
        assert record["elapsed_s"] == done["elapsed_s"] >= 0.0

    def test_timed_silent_on_error(self, capsys: pytest.CaptureFixture[str]) -> None:
        """Test nothing is logged when the block raises."""
        log = StructuredLogger("tests.logger.failed", level="INFO")
        with pytest.raises(RuntimeError, match="boom"):
            with log.timed("Done"):
                raise RuntimeError("boom")
        assert capsys.readouterr().err == ""
