"""Unit tests for the lexicon and corpus configuration."""

import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from mdt_workbench.corpus.lexicon import load_lexicon
from mdt_workbench.models.corpus import CorpusConfig, Lexicon, ManifestEntry, Split


@pytest.mark.unit
class TestLexicon:
    """Test the bundled lexicon and its validation."""

    def test_bundled_lexicon(self) -> None:
        """Test the digit-surrogate lexicon loads in order."""
        lexicon = load_lexicon()
        assert len(lexicon.word_ids) == 11
        assert lexicon.word_ids[:3] == ["one", "two", "three"]

    def test_subset_keeps_used_phones(self) -> None:
        """Test subset keeps the first words and only their phones."""
        lexicon = load_lexicon(n_words=2)
        assert lexicon.word_ids == ["one", "two"]
        assert set(lexicon.phones) == {"w", "ah", "n", "t", "uw"}

    def test_subset_bounds(self) -> None:
        """Test fewer than two words is refused."""
        with pytest.raises(ValueError, match="n_words"):
            load_lexicon().subset(1)

    def test_unknown_phone(self) -> None:
        """Test a word referring to an undefined phone."""
        phone = {"formants_hz": [500, 1500], "bandwidths_hz": [80, 100], "voiced": True, "min_frames": 2, "max_frames": 4}
        with pytest.raises(ValidationError, match="unknown phones"):
            Lexicon(phones={"a": phone}, words={"x": ["a"], "y": ["b"]})

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test an explicit path that does not exist."""
        with pytest.raises(FileNotFoundError):
            load_lexicon(tmp_path / "nope.json")


@pytest.mark.unit
class TestCorpusConfig:
    """Test corpus layout arithmetic and validation."""

    def test_expected_entries(self) -> None:
        """Test the manifest size of the desk layout."""
        cfg = CorpusConfig()
        # train: 5 words x 40 x (clean + 2 kinds x 3 SNRs); test: 5 x 20 x (clean + 2 x 5)
        assert cfg.expected_entries() == 5 * 40 * 7 + 5 * 20 * 11

    def test_cells_clean_first(self) -> None:
        """Test the clean cell leads every split."""
        cfg = CorpusConfig(noise_kinds="white", test_snrs="5, clean, 0")
        cells = cfg.cells(Split.TEST)
        assert math.isinf(cells[0][0])
        assert cells[1:] == [(5.0, "white"), (0.0, "white")]

    def test_unknown_noise_kind(self) -> None:
        """Test noise kinds are validated."""
        with pytest.raises(ValidationError, match="Invalid noise kind"):
            CorpusConfig(noise_kinds="pink")

    def test_noisy_snrs_need_noise(self) -> None:
        """Test SNR levels without any noise kind."""
        with pytest.raises(ValidationError):
            CorpusConfig(noise_kinds=[])

    def test_manifest_line(self) -> None:
        """Test a manifest line parses back into the same entry."""
        entry = ManifestEntry(
            utt_id="test_one_000_clean",
            split=Split.TEST,
            words=("one", "two"),
            snr_db="inf",
            noise_kind="none",
            clean_path="audio/test/test_one_000.clean.f32",
            noise_path="audio/test/test_one_000_clean.noise.f32",
            noisy_path="audio/test/test_one_000_clean.noisy.f32",
        )
        line = entry.to_line()
        assert line.split("\t")[2:4] == ["one,two", "inf"]
        assert ManifestEntry.from_line(line) == entry

    def test_manifest_line_field_count(self) -> None:
        """Test a short line is rejected."""
        with pytest.raises(ValueError, match="8 tab-separated"):
            ManifestEntry.from_line("a\tb\tc")
