"""Unit tests for mask-estimation features."""

import numpy as np
import pytest

from mdt_workbench.frontend.features import to_log
from mdt_workbench.layer.errors import InputValidationError
from mdt_workbench.mask_estimator.features import (
    Standardizer,
    build_feature_matrix,
    feature_dim,
    flatness_feature,
    mask_features,
    noise_floor_estimate,
    subband_snr_feature,
)
from mdt_workbench.models.audio import DeltaConfig, Domain, FrontendConfig
from mdt_workbench.models.estimator import EstimatorConfig
from tests.fixtures.signals import spectro, white_noise


@pytest.mark.unit
class TestNoiseFloor:
    """Test the minimum-statistics noise floor."""

    def test_constant_input(self) -> None:
        """Test a constant band gives bias times its value."""
        floor = noise_floor_estimate(spectro(np.full((60, 3), 2.0)))
        assert floor.tolist() == pytest.approx([3.0, 3.0, 3.0])

    def test_quietest_window_wins(self) -> None:
        """Test the floor follows the lowest moving mean."""
        values = np.full((100, 1), 10.0)
        values[50:90] = 1.0
        assert noise_floor_estimate(spectro(values))[0] == pytest.approx(1.5)

    def test_short_utterance_uses_mean(self) -> None:
        """Test fewer frames than the window fall back to the whole mean."""
        assert noise_floor_estimate(spectro([[1.0], [3.0]]), window=40, bias=1.0)[0] == pytest.approx(2.0)

    def test_log_input_rejected(self) -> None:
        """Test the floor needs linear power."""
        with pytest.raises(InputValidationError, match="linear_power"):
            noise_floor_estimate(spectro(np.zeros((5, 2)), Domain.LOG))


@pytest.mark.unit
class TestSubbandSnr:
    """Test the energy-to-floor feature."""

    def test_values_and_clipping(self) -> None:
        """Test 0 dB, 10 dB and both clamps."""
        floor = np.array([1.0, 1.0, 1.0, 1.0])
        snr = subband_snr_feature(spectro([[1.0, 10.0, 1e-9, 1e9]]), floor)
        assert snr[0].tolist() == pytest.approx([0.0, 10.0, -30.0, 60.0])

    def test_floor_must_be_positive(self) -> None:
        """Test a zero floor is refused."""
        with pytest.raises(InputValidationError, match="positive"):
            subband_snr_feature(spectro([[1.0, 1.0]]), np.array([1.0, 0.0]))

    def test_floor_length(self) -> None:
        """Test the floor needs one value per band."""
        with pytest.raises(InputValidationError, match="floor shape"):
            subband_snr_feature(spectro([[1.0, 1.0]]), np.ones(3))


@pytest.mark.unit
class TestFlatness:
    """Test the spectral flatness feature."""

    def test_constant_window_is_one(self) -> None:
        """Test equal values give exactly 1."""
        assert np.all(flatness_feature(spectro(np.full((8, 2), 0.3))) == 1.0)

    def test_peaked_window(self) -> None:
        """Test geometric over arithmetic mean of a window with one peak."""
        values = np.array([[1.0], [1.0], [1.0], [1.0], [100.0]])
        flat = flatness_feature(spectro(values), half_width=2)
        assert flat[2, 0] == pytest.approx(100.0 ** (1 / 5) / 20.8)

    def test_range(self, rng: np.random.Generator) -> None:
        """Test values lie in (0, 1]."""
        flat = flatness_feature(spectro(rng.exponential(size=(30, 4))))
        assert np.all(flat > 0.0)
        assert np.all(flat <= 1.0)

    def test_half_width(self) -> None:
        """Test H must be at least one frame."""
        with pytest.raises(InputValidationError):
            flatness_feature(spectro(np.ones((4, 1))), half_width=0)


@pytest.mark.unit
class TestFeatureMatrix:
    """Test assembly of the 6K-wide feature matrix."""

    def test_width_and_groups(self, rng: np.random.Generator, delta_cfg: DeltaConfig) -> None:
        """Test group order: snr, flatness, harmonic, random, static, delta."""
        linear = spectro(rng.uniform(0.5, 2.0, size=(12, 3)))
        harmonic = spectro(rng.normal(size=(12, 3)), Domain.LOG)
        random = spectro(rng.normal(size=(12, 3)), Domain.LOG)
        matrix = build_feature_matrix(linear, harmonic, random, delta_cfg, EstimatorConfig())
        assert matrix.shape == (12, feature_dim(3)) == (12, 18)
        assert np.array_equal(matrix[:, 6:9], harmonic.values)
        assert np.array_equal(matrix[:, 9:12], random.values)
        assert np.allclose(matrix[:, 12:15], to_log(linear).values)

    def test_component_shape_mismatch(self, rng: np.random.Generator, delta_cfg: DeltaConfig) -> None:
        """Test harmonic and random parts must match the noisy matrix."""
        linear = spectro(rng.uniform(0.5, 2.0, size=(12, 3)))
        short = spectro(np.zeros((11, 3)), Domain.LOG)
        with pytest.raises(InputValidationError, match="harmonic shape"):
            build_feature_matrix(linear, short, short, delta_cfg, EstimatorConfig())

    def test_components_must_be_log(self, rng: np.random.Generator, delta_cfg: DeltaConfig) -> None:
        """Test linear components are refused."""
        linear = spectro(rng.uniform(0.5, 2.0, size=(12, 3)))
        with pytest.raises(InputValidationError, match="log-mel"):
            build_feature_matrix(linear, linear, linear, delta_cfg, EstimatorConfig())

    def test_from_waveform(self, frontend_cfg: FrontendConfig, delta_cfg: DeltaConfig) -> None:
        """Test a noisy waveform yields finite T x 6K features."""
        wave = white_noise(n_samples=4000)
        matrix = mask_features(wave, frontend_cfg, delta_cfg, EstimatorConfig())
        assert matrix.shape == (frontend_cfg.n_frames(4000), 6 * frontend_cfg.n_mel)
        assert np.all(np.isfinite(matrix))


@pytest.mark.unit
class TestStandardizer:
    """Test global feature standardization."""

    def test_zero_mean_unit_scale(self, rng: np.random.Generator) -> None:
        """Test fitted statistics standardize the training matrix."""
        features = rng.normal(3.0, 2.0, size=(200, 4))
        z = Standardizer.fit(features).transform(features)
        assert np.allclose(z.mean(axis=0), 0.0)
        assert np.allclose(z.std(axis=0), 1.0)

    def test_constant_dimension(self) -> None:
        """Test a constant column gets scale 1."""
        features = np.column_stack([np.full(5, 7.0), np.arange(5.0)])
        std = Standardizer.fit(features)
        assert std.scale[0] == 1.0
        assert np.all(std.transform(features)[:, 0] == 0.0)

    def test_inverse(self, rng: np.random.Generator) -> None:
        """Test inverse_transform undoes transform."""
        features = rng.normal(size=(10, 3))
        std = Standardizer.fit(features)
        assert np.allclose(std.inverse_transform(std.transform(features)), features)

    def test_width_mismatch(self, rng: np.random.Generator) -> None:
        """Test matrices of another width are refused."""
        std = Standardizer.fit(rng.normal(size=(10, 3)))
        with pytest.raises(InputValidationError, match="width"):
            std.transform(np.zeros((2, 4)))
