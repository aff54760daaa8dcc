"""Tests for SEDREAMS and Fast SEDREAMS."""

import numpy as np
import pytest

from gci_toolkit.dsp import local_minima, make_window
from gci_toolkit.evaluation import ReferenceCycles, evaluate
from gci_toolkit.models import DetectorSettings, WindowShape, WindowSpec
from gci_toolkit.sedreams import (
    PresenceInterval,
    coarse_to_fine_minima,
    detect_sedreams,
    detect_sedreams_fast,
    gci_position_distribution,
    intervals_from_minima,
    mean_based_signal,
    refine_with_residual,
)
from gci_toolkit.signals import GciSequence, PitchPrior, Waveform
from gci_toolkit.synthetic import SyntheticUtterance, synthetic_suite, synthetic_vowel


class TestMeanBasedSignal:
    """Test the mean-based signal."""

    def test_constant_input_is_preserved(self) -> None:
        """Test that renormalized boundary windows keep a constant signal constant."""
        x = Waveform(np.full(2000, 0.3), 16000.0)
        mbs = mean_based_signal(x, PitchPrior.from_f0(100.0, 16000.0))
        np.testing.assert_allclose(mbs.values, 0.3)

    def test_window_length(self) -> None:
        """Test that the window spans 1.75 mean periods."""
        x = Waveform(np.zeros(1000), 16000.0)
        mbs = mean_based_signal(x, PitchPrior.from_f0(100.0, 16000.0))
        assert mbs.window.length == 281
        assert mbs.window.shape == WindowShape.BLACKMAN

    def test_one_minimum_per_cycle(self, vowel: SyntheticUtterance) -> None:
        """Test that the mean-based signal oscillates at the pitch of the vowel."""
        mbs = mean_based_signal(vowel.speech, vowel.prior)
        minima = local_minima(mbs.values)
        voiced = minima[(minima > vowel.gcis.instants[0]) & (minima < vowel.gcis.instants[-1])]
        assert abs(voiced.size - (len(vowel.gcis) - 1)) <= 2


class TestIntervals:
    """Test intervals of presence and residual refinement."""

    def test_intervals_reuse_last_period(self) -> None:
        """Test that the last interval borrows the preceding period."""
        intervals = intervals_from_minima(np.array([100, 260, 420]), 0.35)
        assert [i.start for i in intervals] == [100, 260, 420]
        assert [i.period for i in intervals] == [160.0, 160.0, 160.0]
        assert intervals[0].length == pytest.approx(56.0)
        assert intervals[0].stop == 156

    def test_single_minimum_has_no_interval(self) -> None:
        """Test that one minimum cannot define a period."""
        assert intervals_from_minima(np.array([100])) == []

    def test_refine_picks_largest_positive_residual(self) -> None:
        """Test that each interval yields its largest positive residual sample."""
        residual = np.zeros(300)
        residual[[110, 120, 250]] = [0.5, 0.9, -3.0]
        residual[265] = 0.2
        intervals = [PresenceInterval(100, 30.0, 100.0), PresenceInterval(240, 30.0, 100.0)]
        gcis = refine_with_residual(intervals, Waveform(residual, 16000.0))
        np.testing.assert_array_equal(gcis.instants, [120.0, 265.0])

    def test_refine_skips_non_positive_intervals(self) -> None:
        """Test that intervals without a positive residual sample are skipped."""
        residual = -np.ones(200)
        gcis = refine_with_residual([PresenceInterval(10, 50.0, 100.0)], Waveform(residual, 16000.0))
        assert len(gcis) == 0


class TestDetectSedreams:
    """Test SEDREAMS end to end."""

    def test_identifies_most_cycles(self, vowel: SyntheticUtterance, true_cycles: ReferenceCycles) -> None:
        """Test identification rate and accuracy on a clean synthetic vowel."""
        gcis = detect_sedreams(vowel.speech, vowel.prior)
        assert gcis.source == "sedreams"
        report = evaluate(true_cycles, gcis)
        assert report.idr_pct > 90.0
        assert report.idr_pct + report.mr_pct + report.far_pct == pytest.approx(100.0)

    def test_positions_cluster_inside_cycles(self, vowel: SyntheticUtterance) -> None:
        """Test that GCIs fall in a narrow part of the mean-based-signal cycle."""
        gcis = detect_sedreams(vowel.speech, vowel.prior)
        centers, counts = gci_position_distribution(vowel.speech, vowel.prior, gcis)
        assert centers.size == counts.size == 20
        assert counts.sum() > 0
        assert counts[:10].sum() > 0.8 * counts.sum()

    def test_position_distribution_empty(self, vowel: SyntheticUtterance) -> None:
        """Test that no GCIs give an all-zero histogram."""
        empty = GciSequence.empty(16000.0)
        _, counts = gci_position_distribution(vowel.speech, vowel.prior, empty, bins=5)
        np.testing.assert_array_equal(counts, np.zeros(5))


class TestFastSedreams:
    """Test the coarse-to-fine variant."""

    def test_coarse_minima_match_dense_minima(self) -> None:
        """Test that coarse-to-fine search lands on the dense local minima of a smooth signal."""
        n = np.arange(4000)
        samples = np.cos(2 * np.pi * n / 160.0) + 0.3 * np.cos(2 * np.pi * n / 53.0)
        kernel = make_window(WindowSpec(shape=WindowShape.BLACKMAN, half_length=20))
        dense = coarse_to_fine_minima(samples, kernel, 0)
        coarse = coarse_to_fine_minima(samples, kernel, 4)
        interior = dense[(dense > 100) & (dense < 3900)]
        distance = np.min(np.abs(interior[:, None] - coarse[None, :]), axis=1)
        assert np.all(distance == 0)

    @pytest.mark.parametrize("f0", [100.0, 160.0, 220.0])
    def test_agrees_with_full(self, f0: float) -> None:
        """Test that fast and full SEDREAMS agree within one sample on nearly every GCI."""
        utterance = synthetic_vowel(f0_hz=f0, duration_s=1.0, seed=int(f0))
        full = detect_sedreams(utterance.speech, utterance.prior)
        fast = detect_sedreams_fast(utterance.speech, utterance.prior)
        assert fast.source == "fast_sedreams"
        distance = np.min(np.abs(full.instants[:, None] - fast.instants[None, :]), axis=1)
        assert np.mean(distance <= 1.0) >= 0.99

    @pytest.mark.slow
    def test_agrees_with_full_over_suite(self) -> None:
        """Test one-sample agreement on at least 99% of the GCIs of a minute of synthetic speech."""
        agreeing = total = 0
        for utterance in synthetic_suite(total_s=60.0, utterance_s=2.0):
            full = detect_sedreams(utterance.speech, utterance.prior)
            fast = detect_sedreams_fast(utterance.speech, utterance.prior)
            distance = np.min(np.abs(full.instants[:, None] - fast.instants[None, :]), axis=1)
            agreeing += int(np.sum(distance <= 1.0))
            total += len(full)
        assert total > 3000
        assert agreeing / total >= 0.99

    def test_high_pitch_lowers_level(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test that p is reduced with a warning when cycles are too short for the grid."""
        utterance = synthetic_vowel(f0_hz=220.0, duration_s=0.5, seed=5)
        with caplog.at_level("WARNING"):
            gcis = detect_sedreams_fast(utterance.speech, utterance.prior, DetectorSettings(fast_level=7))
        assert "too large" in caplog.text
        assert len(gcis) > 0
