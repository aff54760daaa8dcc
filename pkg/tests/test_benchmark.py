"""Tests for relative computation time measurement."""

import pytest

from gci_toolkit.benchmark import bench_rct, cpu_seconds, fast_ratios, relative_ordering
from gci_toolkit.models import DetectorSettings, RctReport
from gci_toolkit.synthetic import SyntheticUtterance, synthetic_suite


class TestRctReports:
    """Test RCT bookkeeping without timing anything."""

    def test_rct_percentage(self) -> None:
        """Test that RCT is CPU time over audio time in percent."""
        assert RctReport(method="he", audio_seconds=20.0, cpu_seconds=1.0).rct_pct == pytest.approx(5.0)

    def test_ordering_and_ratios(self) -> None:
        """Test fastest-first ordering and fast/full ratios."""
        reports = [
            RctReport(method="sedreams", audio_seconds=10.0, cpu_seconds=2.0),
            RctReport(method="fast_sedreams", audio_seconds=10.0, cpu_seconds=0.5),
            RctReport(method="zfr", audio_seconds=10.0, cpu_seconds=1.0),
            RctReport(method="fast_he", audio_seconds=10.0, cpu_seconds=0.1),
        ]
        assert relative_ordering(reports) == ["fast_he", "fast_sedreams", "zfr", "sedreams"]
        assert fast_ratios(reports) == {"fast_sedreams": pytest.approx(0.25)}

    def test_invalid_arguments(self, vowel: SyntheticUtterance) -> None:
        """Test that empty inputs and zero repetitions are rejected."""
        with pytest.raises(ValueError):
            bench_rct(["he"], [])
        with pytest.raises(ValueError):
            bench_rct(["he"], [(vowel.speech, vowel.prior)], repetitions=0)


class TestBenchRct:
    """Test CPU timing of detectors."""

    def test_cpu_seconds_is_non_negative(self, vowel: SyntheticUtterance) -> None:
        """Test that timing a detector returns a non-negative duration."""
        assert cpu_seconds("zfr", [(vowel.speech, vowel.prior)], DetectorSettings()) >= 0.0

    def test_reports_per_method(self, vowel: SyntheticUtterance) -> None:
        """Test one report per method with the total audio duration."""
        reports = bench_rct(["zfr", "sedreams"], [(vowel.speech, vowel.prior)], repetitions=1)
        assert [r.method for r in reports] == ["zfr", "sedreams"]
        assert all(r.audio_seconds == pytest.approx(vowel.speech.duration_s) for r in reports)

    @pytest.mark.slow
    def test_fast_sedreams_is_faster(self) -> None:
        """Test that fast SEDREAMS runs in less CPU time than SEDREAMS on a minute of speech."""
        recordings = [(u.speech, u.prior) for u in synthetic_suite(total_s=64.0, utterance_s=2.0)]
        assert sum(speech.duration_s for speech, _ in recordings) >= 60.0
        ratios = fast_ratios(bench_rct(["sedreams", "fast_sedreams"], recordings, repetitions=3))
        assert ratios["fast_sedreams"] < 1.0
