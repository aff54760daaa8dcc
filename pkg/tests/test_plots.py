"""Tests for figure output."""

from pathlib import Path

import numpy as np

from gci_toolkit.models import EvalReport
from gci_toolkit.plots import plot_cog_histogram, plot_error_histogram, plot_position_histogram, plot_sweep


class TestPlots:
    """Test that every figure is written as PNG."""

    def test_error_histogram(self, temp_dir: Path) -> None:
        """Test the timing error histogram."""
        report = EvalReport.from_outcomes("zfr", "clean", 4, 0, 0, [-0.2, 0.0, 0.05, 3.0])
        path = plot_error_histogram(report, temp_dir / "histograms" / "zfr_clean.png")
        assert path.exists()
        assert path.read_bytes()[:4] == b"\x89PNG"

    def test_error_histogram_without_cycles(self, temp_dir: Path) -> None:
        """Test that an empty report still draws."""
        report = EvalReport.from_outcomes("he", "clean", 0, 0, 0, [])
        assert plot_error_histogram(report, temp_dir / "empty.png").exists()

    def test_sweep(self, temp_dir: Path) -> None:
        """Test the sweep plot skips methods without points."""
        series = {"zfr": [(10.0, 95.0), (0.0, 80.0)], "he": []}
        assert plot_sweep(series, temp_dir / "sweep.png", "SNR (dB)", title="White noise").exists()

    def test_cog_histogram(self, temp_dir: Path) -> None:
        """Test the centre-of-gravity distribution."""
        cog = np.random.default_rng(0).uniform(500.0, 5000.0, 200)
        assert plot_cog_histogram(cog, 2700.0, temp_dir / "cog.png").exists()

    def test_position_histogram(self, temp_dir: Path) -> None:
        """Test the cycle position histogram."""
        counts = np.arange(20, dtype=np.float64)
        assert plot_position_histogram(counts, temp_dir / "positions" / "low.png", "low").exists()
