"""SEDREAMS detector: mean-based signal for intervals of presence, LP residual for the exact instant."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .dsp import coarse_level, local_minima, lp_analysis, make_window, truncated_weight, windowed_sum_at
from .models import DetectorSettings, WindowShape, WindowSpec
from .signals import FloatArray, GciSequence, IntArray, PitchPrior, Waveform

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeanBasedSignal:
    """Blackman-weighted local mean of the speech signal."""

    values: FloatArray
    window: WindowSpec


@dataclass(frozen=True)
class PresenceInterval:
    """Interval [start, start + length] expected to contain one GCI."""

    start: int
    length: float
    period: float

    @property
    def stop(self) -> int:
        """Last sample index inside the interval."""
        return int(np.floor(self.start + self.length))


def _mbs_window(prior: PitchPrior, settings: DetectorSettings) -> WindowSpec:
    return WindowSpec.for_period(prior.mean_period_samples, settings.sedreams_window_factor, WindowShape.BLACKMAN)


def _mbs_at(samples: FloatArray, kernel: FloatArray, indices: IntArray) -> FloatArray:
    return windowed_sum_at(samples, kernel, indices) / truncated_weight(kernel, indices, samples.size)


def mean_based_signal(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> MeanBasedSignal:
    """Evaluate the mean-based signal at every sample.

    Boundary windows are truncated and renormalized, so the output is a convex
    combination of the input samples.
    """
    settings = settings or DetectorSettings()
    window = _mbs_window(prior.at_rate(x.sample_rate_hz), settings)
    kernel = make_window(window)
    values = _mbs_at(x.samples, kernel, np.arange(len(x), dtype=np.int64))
    return MeanBasedSignal(values, window)


def intervals_from_minima(minima: IntArray, interval_factor: float = 0.35) -> list[PresenceInterval]:
    """One interval per minimum; the last one reuses the preceding period."""
    if minima.size < 2:
        return []
    periods = np.diff(minima).astype(np.float64)
    periods = np.append(periods, periods[-1])
    return [
        PresenceInterval(int(start), interval_factor * float(period), float(period))
        for start, period in zip(minima, periods)
    ]


def intervals_of_presence(m: MeanBasedSignal, interval_factor: float = 0.35) -> list[PresenceInterval]:
    """Intervals starting at each minimum of the mean-based signal."""
    return intervals_from_minima(local_minima(m.values), interval_factor)


def refine_with_residual(
    intervals: Sequence[PresenceInterval], e: Waveform, source: str = "sedreams"
) -> GciSequence:
    """Largest positive residual sample inside each interval; all-zero intervals are skipped."""
    residual = np.clip(e.samples, 0.0, None)
    n = residual.size
    instants: list[int] = []
    skipped = 0
    for interval in intervals:
        if interval.start >= n:
            continue
        segment = residual[interval.start : min(n, interval.stop + 1)]
        if not np.any(segment > 0):
            skipped += 1
            continue
        instants.append(interval.start + int(np.argmax(segment)))
    if skipped:
        logger.debug(f"{source}: skipped {skipped} intervals without positive residual")
    return GciSequence(np.asarray(instants, dtype=np.float64), e.sample_rate_hz, source)


def detect_sedreams(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """GCIs from intervals of presence refined on the LP residual."""
    settings = settings or DetectorSettings()
    mbs = mean_based_signal(x, prior, settings)
    intervals = intervals_of_presence(mbs, settings.interval_factor)
    residual = x.with_samples(lp_analysis(x, settings.lpc).residual)
    logger.debug(f"sedreams: {len(intervals)} intervals, window {mbs.window.length}")
    return refine_with_residual(intervals, residual, "sedreams")


def coarse_to_fine_minima(samples: FloatArray, kernel: FloatArray, level: int) -> IntArray:
    """Minima of the mean-based signal found on a 2**level grid and refined by halving steps."""
    n = samples.size
    if n < 3:
        return np.zeros(0, dtype=np.int64)
    step = 2**level
    grid = np.arange(0, n, step, dtype=np.int64)
    coarse = _mbs_at(samples, kernel, grid)
    centers = grid[local_minima(coarse)]
    if centers.size == 0:
        return centers

    def value(indices: IntArray) -> FloatArray:
        return _mbs_at(samples, kernel, np.clip(indices, 0, n - 1))

    current = value(centers)
    s = step // 2
    while s >= 1:
        left, right = value(centers - s), value(centers + s)
        go_left = (left < current) & (left <= right) & (centers - s >= 0)
        go_right = ~go_left & (right < current) & (centers + s <= n - 1)
        centers = np.where(go_left, centers - s, np.where(go_right, centers + s, centers))
        current = np.where(go_left, left, np.where(go_right, right, current))
        s //= 2

    for _ in range(step):
        left, right = value(centers - 1), value(centers + 1)
        go_left = (left < current) & (left <= right) & (centers > 0)
        go_right = ~go_left & (right < current) & (centers < n - 1)
        if not np.any(go_left | go_right):
            break
        centers = np.where(go_left, centers - 1, np.where(go_right, centers + 1, centers))
        current = np.where(go_left, left, np.where(go_right, right, current))
    return np.unique(centers)


def detect_sedreams_fast(
    x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None, level: int | None = None
) -> GciSequence:
    """SEDREAMS with the mean-based signal evaluated on a 2**p grid, then refined.

    p is reduced with a warning when a cycle would get fewer than two grid points.
    """
    settings = settings or DetectorSettings()
    prior = prior.at_rate(x.sample_rate_hz)
    p = coarse_level(settings.fast_level if level is None else level, prior.mean_period_samples)
    kernel = make_window(_mbs_window(prior, settings))
    minima = coarse_to_fine_minima(x.samples, kernel, p)
    intervals = intervals_from_minima(minima, settings.interval_factor)
    residual = x.with_samples(lp_analysis(x, settings.lpc).residual)
    logger.debug(f"fast_sedreams: p={p}, {len(intervals)} intervals")
    return refine_with_residual(intervals, residual, "fast_sedreams")


def gci_position_distribution(
    x: Waveform,
    prior: PitchPrior,
    gcis: GciSequence,
    settings: DetectorSettings | None = None,
    bins: int = 20,
) -> tuple[FloatArray, IntArray]:
    """Histogram of GCI positions inside mean-based-signal cycles.

    A GCI between minima k and k+1 sits at (gci - min_k) / (min_{k+1} - min_k) in [0, 1).

    Returns:
        Tuple of (bin centers, counts)
    """
    minima = local_minima(mean_based_signal(x, prior, settings).values)
    edges = np.linspace(0.0, 1.0, bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    if minima.size < 2 or len(gcis) == 0:
        return centers, np.zeros(bins, dtype=np.int64)
    k = np.searchsorted(minima, gcis.instants, side="right") - 1
    inside = (k >= 0) & (k < minima.size - 1)
    start = minima[k[inside]]
    period = minima[k[inside] + 1] - start
    positions = (gcis.instants[inside] - start) / period
    counts, _ = np.histogram(positions, bins=edges)
    return centers, counts.astype(np.int64)
