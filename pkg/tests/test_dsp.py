"""Tests for the shared signal processing primitives."""

import numpy as np
import pytest
from scipy.linalg import solve_toeplitz
from scipy.signal import lfilter

from gci_toolkit.dsp import (
    CrossingDirection,
    _blocked_envelope,
    analyze_frames,
    coarse_level,
    hilbert_envelope,
    inverse_filter,
    levinson_durbin,
    local_maxima,
    local_minima,
    lp_analysis,
    lpc_analyze,
    make_periodic_window,
    make_window,
    next_pow2,
    preemphasize,
    synthesis_filter,
    truncated_weight,
    windowed_sum_at,
    zero_crossings,
)
from gci_toolkit.exceptions import ConfigurationError
from gci_toolkit.models import LpcConfig, WindowShape, WindowSpec
from gci_toolkit.signals import LpcModel, Waveform
from gci_toolkit.synthetic import SyntheticUtterance


class TestWindows:
    """Test window construction."""

    @pytest.mark.parametrize("shape", list(WindowShape))
    def test_make_window_symmetric_and_normalized(self, shape: WindowShape) -> None:
        """Test that windows have odd length, unit peak and mirror symmetry."""
        spec = WindowSpec(shape=shape, half_length=10)
        w = make_window(spec)
        assert w.size == 21
        assert w.max() == pytest.approx(1.0)
        assert np.all(w >= 0)
        np.testing.assert_allclose(w, w[::-1])

    def test_periodic_window_peak_position(self) -> None:
        """Test that even-length periodic windows peak at length // 2."""
        w = make_periodic_window(WindowShape.BLACKMAN, 64)
        assert w.size == 64
        assert int(np.argmax(w)) == 32

    def test_next_pow2(self) -> None:
        """Test power-of-two rounding."""
        assert next_pow2(1) == 1
        assert next_pow2(5) == 8
        assert next_pow2(1024) == 1024


class TestLinearPrediction:
    """Test Levinson-Durbin and frame-based LPC."""

    def test_levinson_matches_normal_equations(self) -> None:
        """Test that the recursion solves the Toeplitz normal equations."""
        rng = np.random.default_rng(0)
        x = lfilter([1.0], [1.0, -0.9, 0.4], rng.standard_normal(4000))
        r = np.array([np.dot(x[: x.size - k], x[k:]) for k in range(5)])
        a, reflection, err = levinson_durbin(r, 4)
        expected = solve_toeplitz(r[:4], -r[1:5])
        np.testing.assert_allclose(a, expected, rtol=1e-6, atol=1e-9)
        assert np.all(np.abs(reflection) < 1)
        assert err > 0

    def test_levinson_batched(self) -> None:
        """Test that leading axes are processed independently."""
        r = np.array([[1.0, 0.5, 0.2], [2.0, -1.0, 0.3]])
        a, _, err = levinson_durbin(r, 2)
        assert a.shape == (2, 2)
        assert err.shape == (2,)
        single, _, _ = levinson_durbin(r[1], 2)
        np.testing.assert_allclose(a[1], single)

    def test_levinson_zero_energy_gives_identity(self) -> None:
        """Test that a silent frame yields zero predictor coefficients."""
        a, reflection, _ = levinson_durbin(np.zeros(4), 3)
        np.testing.assert_array_equal(a, np.zeros(3))
        np.testing.assert_array_equal(reflection, np.zeros(3))

    def test_levinson_rejects_short_autocorrelation(self) -> None:
        """Test that too few lags raise a configuration error."""
        with pytest.raises(ConfigurationError):
            levinson_durbin(np.ones(3), 4)

    def test_lpc_recovers_ar_process(self) -> None:
        """Test that LPC of a stationary AR(2) process recovers its polynomial."""
        rng = np.random.default_rng(1)
        x = Waveform(lfilter([1.0], [1.0, -1.2, 0.5], rng.standard_normal(16000)), 16000.0)
        models = lpc_analyze(x, order=2, frame_len=4000, hop=4000, window=WindowShape.RECTANGULAR)
        _, model = models[1]
        np.testing.assert_allclose(model.coefficients, [-1.2, 0.5], atol=0.05)
        assert model.is_minimum_phase()

    def test_lpc_rejects_invalid_preemphasis(self) -> None:
        """Test that preemphasis outside [0, 1) is rejected."""
        x = Waveform(np.ones(1000), 16000.0)
        with pytest.raises(ConfigurationError):
            lpc_analyze(x, order=4, frame_len=400, hop=80, preemphasis=1.0)

    def test_analyze_frames_rejects_short_frames(self) -> None:
        """Test that frames shorter than twice the order are rejected."""
        with pytest.raises(ConfigurationError):
            analyze_frames(np.ones(100), order=10, frame_length=15, hop=5)

    def test_frame_count_covers_signal(self) -> None:
        """Test that the last partial frame is included."""
        track = analyze_frames(np.random.default_rng(2).standard_normal(1000), 4, 400, 80)
        assert track.n_frames == 1 + int(np.ceil((1000 - 400) / 80))
        assert track.frame_of(np.array([0, 10**6])).tolist() == [0, track.n_frames - 1]

    def test_inverse_and_synthesis_filters_invert(self) -> None:
        """Test that synthesis 1/A(z) undoes the prediction-error filter."""
        model = LpcModel(np.array([-0.9, 0.3]))
        frame = np.random.default_rng(3).standard_normal(256)
        np.testing.assert_allclose(synthesis_filter(inverse_filter(frame, model), model), frame, atol=1e-10)

    def test_residual_is_spiky_on_impulse_vowel(self, impulse_vowel: SyntheticUtterance) -> None:
        """Test that the LP residual peaks near the excitation impulses."""
        analysis = lp_analysis(impulse_vowel.speech, LpcConfig())
        assert analysis.residual.size == len(impulse_vowel.speech)
        peaks = np.argsort(np.abs(analysis.residual))[-10:]
        truth = impulse_vowel.gcis.rounded()
        distances = np.min(np.abs(peaks[:, None] - truth[None, :]), axis=1)
        assert np.all(distances <= 2)

    def test_preemphasis_zero_is_copy(self) -> None:
        """Test that a zero coefficient leaves samples unchanged."""
        samples = np.arange(5.0)
        out = preemphasize(samples, 0.0)
        np.testing.assert_array_equal(out, samples)
        assert out is not samples


class TestEnvelopeAndCrossings:
    """Test Hilbert envelope, zero crossings and extrema."""

    def test_envelope_of_tone_is_flat(self) -> None:
        """Test that the envelope of a sinusoid equals its amplitude away from the edges."""
        t = np.arange(4000) / 8000.0
        x = Waveform(0.7 * np.cos(2 * np.pi * 500 * t), 8000.0)
        envelope = hilbert_envelope(x).samples
        np.testing.assert_allclose(envelope[200:-200], 0.7, atol=1e-3)

    def test_blocked_envelope_matches_direct(self) -> None:
        """Test that block-wise envelopes agree with the full-length transform in the interior."""
        t = np.arange(20000) / 8000.0
        samples = np.cos(2 * np.pi * 300 * t) * (1.0 + 0.5 * np.cos(2 * np.pi * 3 * t))
        direct = hilbert_envelope(Waveform(samples, 8000.0)).samples
        blocked = _blocked_envelope(samples, 4096)
        np.testing.assert_allclose(blocked[500:-500], direct[500:-500], atol=1e-2)

    def test_zero_crossings_interpolated(self) -> None:
        """Test fractional crossing positions in both directions."""
        x = np.array([1.0, -1.0, -1.0, 3.0])
        np.testing.assert_allclose(zero_crossings(x, CrossingDirection.NEGATIVE_GOING), [0.5])
        np.testing.assert_allclose(zero_crossings(x, CrossingDirection.POSITIVE_GOING), [2.25])

    def test_zero_crossings_skip_inert(self) -> None:
        """Test that crossings touching inert samples are dropped."""
        x = np.array([1.0, -1.0, 1.0, -1.0])
        inert = np.array([False, False, True, False])
        np.testing.assert_allclose(zero_crossings(x, inert=inert), [0.5])

    def test_zero_crossings_short_input(self) -> None:
        """Test that a single sample has no crossings."""
        assert zero_crossings(np.array([1.0])).size == 0

    def test_local_extrema(self) -> None:
        """Test minima and maxima including a flat minimum."""
        x = np.array([3.0, 1.0, 1.0, 1.0, 4.0, 2.0, 5.0])
        assert local_minima(x).tolist() == [2, 5]
        assert local_maxima(x).tolist() == [4]


class TestWindowedSums:
    """Test windowed sums and the coarse grid level."""

    def test_windowed_sum_matches_convolution(self) -> None:
        """Test that windowed sums equal a same-mode correlation with zero padding."""
        rng = np.random.default_rng(4)
        samples = rng.standard_normal(200)
        kernel = rng.standard_normal(7)
        expected = np.correlate(np.pad(samples, 3), kernel, mode="valid")
        got = windowed_sum_at(samples, kernel, np.arange(200), chunk=17)
        np.testing.assert_allclose(got, expected)

    def test_windowed_sum_two_column_kernel(self) -> None:
        """Test that a 2-D kernel returns one column per weighting."""
        kernel = np.column_stack([np.ones(3), np.arange(3.0)])
        out = windowed_sum_at(np.ones(10), kernel, np.array([5]))
        np.testing.assert_allclose(out, [[3.0, 3.0]])

    def test_truncated_weight_at_edges(self) -> None:
        """Test that only in-range taps count near the boundaries."""
        kernel = np.ones(5)
        np.testing.assert_allclose(truncated_weight(kernel, np.array([0, 1, 5, 9]), 10), [3, 4, 5, 3])

    def test_coarse_level_reduced_with_warning(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that p is lowered until each cycle has at least two grid points."""
        assert coarse_level(4, 200.0) == 4
        with caplog.at_level("WARNING"):
            assert coarse_level(6, 40.0) == 4
        assert "using p=4" in caplog.text
