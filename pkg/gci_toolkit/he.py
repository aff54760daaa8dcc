"""Hilbert-envelope detector: center-of-gravity signal over the envelope of the LP residual."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dsp import (
    CrossingDirection,
    coarse_level,
    hilbert_envelope,
    lp_analysis,
    make_window,
    windowed_sum_at,
    zero_crossings,
)
from .models import DetectorSettings, WindowShape, WindowSpec
from .signals import FloatArray, GciSequence, IntArray, PitchPrior, Waveform

logger = logging.getLogger(__name__)

INERT_RATIO = 1e-12


@dataclass(frozen=True)
class CogSignal:
    """Center-of-gravity offset (in samples) of the windowed envelope around each sample."""

    values: FloatArray
    inert: NDArray[np.bool_]
    window: WindowSpec


def _cog_kernel(window: WindowSpec) -> FloatArray:
    weights = make_window(window)
    offsets = np.arange(-window.half_length, window.half_length + 1, dtype=np.float64)
    return np.column_stack([offsets * weights, weights])


def _cog_from_sums(sums: FloatArray, peak: float) -> tuple[FloatArray, NDArray[np.bool_]]:
    numerator, denominator = sums[:, 0], sums[:, 1]
    inert = ~(denominator > INERT_RATIO * peak)
    values = np.zeros(numerator.size)
    np.divide(numerator, denominator, out=values, where=~inert)
    return values, inert


def cog_signal(envelope: Waveform, window: WindowSpec) -> CogSignal:
    """Evaluate CoG(n) = sum(m w(m) H(n+m)) / sum(w(m) H(n+m)) at every sample.

    Samples where the denominator falls below 1e-12 * max(H) are set to 0 and marked inert.
    """
    h = envelope.samples
    sums = windowed_sum_at(h, _cog_kernel(window), np.arange(h.size, dtype=np.int64))
    values, inert = _cog_from_sums(sums, float(h.max()))
    return CogSignal(values, inert, window)


def _local_energy(envelope: FloatArray, positions: FloatArray, half: int) -> FloatArray:
    cumulative = np.concatenate(([0.0], np.cumsum(envelope**2)))
    center = np.rint(positions).astype(np.int64)
    low = np.clip(center - half, 0, envelope.size)
    high = np.clip(center + half + 1, 0, envelope.size)
    return cumulative[high] - cumulative[low]


def merge_close_crossings(crossings: FloatArray, envelope: FloatArray, min_gap: float, half: int) -> FloatArray:
    """Merge crossings closer than ``min_gap``, keeping the one with more local envelope energy."""
    if crossings.size < 2:
        return crossings
    energy = _local_energy(envelope, crossings, half)
    kept: list[int] = [0]
    for i in range(1, crossings.size):
        if crossings[i] - crossings[kept[-1]] < min_gap:
            if energy[i] > energy[kept[-1]]:
                kept[-1] = i
        else:
            kept.append(i)
    merged = crossings[kept]
    if merged.size != crossings.size:
        logger.debug(f"Merged {crossings.size - merged.size} close HE crossings")
    return merged


@dataclass(frozen=True)
class _EnvelopeAnalysis:
    envelope: FloatArray
    window: WindowSpec
    prior: PitchPrior


def _envelope_analysis(x: Waveform, prior: PitchPrior, settings: DetectorSettings) -> _EnvelopeAnalysis:
    prior = prior.at_rate(x.sample_rate_hz)
    residual = lp_analysis(x, settings.lpc).residual
    envelope = hilbert_envelope(x.with_samples(residual)).samples
    window = WindowSpec.for_period(prior.mean_period_samples, settings.he_window_factor, WindowShape.BLACKMAN)
    return _EnvelopeAnalysis(envelope, window, prior)


def _finish(
    analysis: _EnvelopeAnalysis, crossings: FloatArray, settings: DetectorSettings, x: Waveform, source: str
) -> GciSequence:
    merged = merge_close_crossings(
        crossings,
        analysis.envelope,
        settings.he_merge_factor * analysis.prior.mean_period_samples,
        analysis.window.half_length // 2,
    )
    logger.debug(f"{source}: {merged.size} GCIs from {crossings.size} crossings")
    return GciSequence(merged, x.sample_rate_hz, source)


def detect_he(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """GCIs at negative-going zero crossings of the CoG signal of the residual envelope."""
    settings = settings or DetectorSettings()
    if len(x) < 3:
        return GciSequence.empty(x.sample_rate_hz, "he")
    analysis = _envelope_analysis(x, prior, settings)
    cog = cog_signal(x.with_samples(analysis.envelope), analysis.window)
    crossings = zero_crossings(cog.values, CrossingDirection.NEGATIVE_GOING, inert=cog.inert)
    return _finish(analysis, crossings, settings, x, "he")


def detect_he_fast(
    x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None, level: int | None = None
) -> GciSequence:
    """Fast HE: CoG evaluated on a 2**p grid, crossings refined by bisection of each coarse cell."""
    settings = settings or DetectorSettings()
    if len(x) < 3:
        return GciSequence.empty(x.sample_rate_hz, "fast_he")
    analysis = _envelope_analysis(x, prior, settings)
    p = coarse_level(settings.fast_level if level is None else level, analysis.prior.mean_period_samples)
    h = analysis.envelope
    kernel = _cog_kernel(analysis.window)
    peak = float(h.max())

    def evaluate(indices: IntArray) -> tuple[FloatArray, NDArray[np.bool_]]:
        return _cog_from_sums(windowed_sum_at(h, kernel, indices), peak)

    grid = np.unique(np.append(np.arange(0, h.size, 2**p, dtype=np.int64), h.size - 1))
    values, inert = evaluate(grid)
    positive = (values > 0) & ~inert
    cells = np.flatnonzero(positive[:-1] & ~positive[1:])
    lo, hi = grid[cells], grid[cells + 1]
    lo_val, hi_val = values[cells], values[cells + 1]
    hi_inert = inert[cells + 1]

    active = hi - lo > 1
    while np.any(active):
        mid = (lo[active] + hi[active]) // 2
        mid_val, mid_inert = evaluate(mid)
        goes_low = (mid_val > 0) & ~mid_inert
        which = np.flatnonzero(active)
        up, down = which[goes_low], which[~goes_low]
        lo[up], lo_val[up] = mid[goes_low], mid_val[goes_low]
        hi[down], hi_val[down], hi_inert[down] = mid[~goes_low], mid_val[~goes_low], mid_inert[~goes_low]
        active = hi - lo > 1

    valid = ~hi_inert & (hi_val <= 0)
    crossings = lo[valid] + lo_val[valid] / (lo_val[valid] - hi_val[valid])
    logger.debug(f"fast_he: p={p}, {grid.size} coarse evaluations, {cells.size} coarse crossings")
    return _finish(analysis, crossings, settings, x, "fast_he")
