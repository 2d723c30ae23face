"""Unit tests for report rendering."""

from pathlib import Path

import orjson
import pytest

from mdt_workbench.harness.report import emit_report, format_csv, format_curves, format_text_report
from mdt_workbench.models.experiment import Method
from tests.fixtures.experiment import sample_report


@pytest.mark.unit
class TestTextReport:
    """Test the fixed-width text report."""

    def test_accuracy_table(self) -> None:
        """Test the header, method rows and delta row of the main table."""
        lines = format_text_report(sample_report()).splitlines()
        assert lines[2] == "SNR (dB)         clean      10       0"
        assert lines[3] == "classical         80.0    60.0    40.0"
        assert lines[4] == "state dep.        90.0    70.0    50.0"
        assert lines[5] == "delta acc.        10.0    10.0    10.0"

    def test_hypothesis_line(self) -> None:
        """Test the mask hypothesis count for 23 bands."""
        text = format_text_report(sample_report())
        assert "Mask hypotheses: 2^23 = 8388608 possible masks per frame, S_total = 43 state masks per frame" in text
        assert "T x S_total = 1000 x 43 = 43000" in text

    def test_no_delta_row_without_both_oracles(self) -> None:
        """Test the delta row needs classical and state-dependent results."""
        text = format_text_report(sample_report(methods=(Method.CLASSICAL_ORACLE,)))
        assert "delta acc." not in text

    def test_agreement_rows(self) -> None:
        """Test state-dependent and pooled-baseline agreement with the oracle labels."""
        lines = format_text_report(sample_report()).splitlines()
        start = lines.index("Static mask agreement with oracle labels")
        assert lines[start + 1] == "state dep.       0.900   0.800   0.700"
        assert lines[start + 2] == "pooled base.     0.850   0.700   0.550"

    def test_fallback_row(self) -> None:
        """Test utterances without an oracle alignment are counted per SNR."""
        lines = format_text_report(sample_report()).splitlines()
        start = lines.index("Utterances without an oracle alignment (classical decode path used)")
        assert lines[start + 1] == "state dep.           0       1       2"
        classical_only = format_text_report(sample_report(methods=(Method.CLASSICAL_ORACLE,)))
        assert "oracle alignment" not in classical_only
        assert "agreement" not in classical_only

    def test_per_noise_tables(self) -> None:
        """Test per-noise tables list noisy SNRs only and can be switched off."""
        text = format_text_report(sample_report())
        section = text.split("Word accuracy (%), noise: white\n")[1].splitlines()
        assert section[0] == "SNR (dB)            10       0"
        assert "noise: white" not in format_text_report(sample_report(), per_noise_tables=False)

    def test_deterministic(self) -> None:
        """Test rendering twice gives identical text."""
        assert format_text_report(sample_report()) == format_text_report(sample_report())


@pytest.mark.unit
class TestMachineReadableOutputs:
    """Test report.csv, curves.dat and report.json."""

    def test_csv_rows(self) -> None:
        """Test one row per (SNR, method, metric) with clean written as inf."""
        rows = format_csv(sample_report()).splitlines()
        assert rows[0] == "snr,method,metric,value"
        assert len(rows) == 1 + 3 * 2 * 3
        assert rows[1] == "inf,classical_oracle,accuracy,80.0"
        assert "0,state_dependent_oracle,reliable_fraction,0.5000" in rows

    def test_curves(self) -> None:
        """Test one block per method, clean plotted at 25 dB."""
        text = format_curves(sample_report())
        blocks = text.split("\n\n\n")
        assert len(blocks) == 2
        assert blocks[1].splitlines()[:3] == [
            "# state_dependent_oracle (state dep.)",
            "# snr_db accuracy",
            "25 90.0",
        ]
        assert blocks[1].splitlines()[-1] == "0 50.0"

    def test_emit(self, tmp_path: Path) -> None:
        """Test all four files are written and the JSON keeps clean as 'inf'."""
        paths = emit_report(sample_report(), tmp_path / "report")
        assert [p.name for p in paths] == ["report.txt", "report.csv", "curves.dat", "report.json"]
        data = orjson.loads((tmp_path / "report" / "report.json").read_bytes())
        assert data["snrs"] == ["inf", "10", "0"]
        assert data["hypothesis"]["n_bands"] == 23
        state_dependent = [r for r in data["results"] if r["method"] == "state_dependent_oracle" and r["noise_kind"] == "all"]
        assert [r["oracle_fallbacks"] for r in state_dependent] == [0, 1, 2]
