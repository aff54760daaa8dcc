"""YAGA detector: multiscale product of the voice source estimate, group-delay candidates, DP selection."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.signal import convolve

from .dsp import lp_analysis, prediction_error
from .dypsa import dp_select, group_delay_candidates
from .exceptions import SignalTooShortError
from .models import DetectorSettings, LpcConfig
from .signals import FloatArray, GciSequence, PitchPrior, Waveform

logger = logging.getLogger(__name__)

# Quadratic spline pair: smoothing taps and derivative taps.
SPLINE_LOWPASS = np.array([1.0, 3.0, 3.0, 1.0]) / 8.0
SPLINE_HIGHPASS = np.array([2.0, -2.0])


@dataclass(frozen=True)
class MultiscaleProduct:
    """Product of the first ``depth`` detail levels of the undecimated wavelet transform."""

    values: FloatArray
    depth: int


def voice_source_estimate(x: Waveform, config: LpcConfig | None = None) -> Waveform:
    """Inverse-filter the speech without preemphasis, using the coefficients of the residual path."""
    track = lp_analysis(x, config).track
    return x.with_samples(prediction_error(x.samples, track))


def _dilated(taps: FloatArray, level: int) -> FloatArray:
    step = 2 ** (level - 1)
    kernel = np.zeros((taps.size - 1) * step + 1)
    kernel[::step] = taps
    return kernel


def _centered_filter(signal: FloatArray, kernel: FloatArray) -> FloatArray:
    """Convolution aligned on the kernel center, with symmetric boundary extension."""
    center = (kernel.size - 1) // 2
    padded = np.pad(signal, (kernel.size - 1 - center, center), mode="symmetric")
    return np.asarray(convolve(padded, kernel, mode="valid"), dtype=np.float64)


def swt_details(u: FloatArray, levels: int) -> list[FloatArray]:
    """Detail coefficients d_1..d_levels; filters are upsampled by two at each level."""
    details: list[FloatArray] = []
    approximation = u
    for level in range(1, levels + 1):
        details.append(_centered_filter(approximation, _dilated(SPLINE_HIGHPASS, level)))
        approximation = _centered_filter(approximation, _dilated(SPLINE_LOWPASS, level))
    return details


def swt_multiscale_product(u: Waveform, j1: int = 3) -> MultiscaleProduct:
    """p(n) = d_1(n) d_2(n) ... d_j1(n)."""
    if j1 < 1:
        raise ValueError(f"Product depth must be at least 1, got {j1}")
    if 2**j1 > len(u):
        raise SignalTooShortError(f"{len(u)} samples are too few for {j1} wavelet levels")
    product = np.prod(np.vstack(swt_details(u.samples, j1)), axis=0)
    return MultiscaleProduct(product, j1)


def closure_costs(source: FloatArray, times: FloatArray, period: float) -> FloatArray:
    """Closing/opening discrimination: -0.5 times the normalized upward jump of the source at t.

    GCIs end the return phase with a sharp rise of the source derivative; openings do not.
    The jump is scaled by the peak-to-peak source amplitude over one period around t.
    """
    if times.size == 0:
        return np.zeros(0)
    n = source.size
    span = max(1, int(round(period / 8)))
    cumulative = np.concatenate(([0.0], np.cumsum(source)))
    idx = np.clip(np.rint(times).astype(np.int64), 0, n - 1)
    b_lo, b_hi = np.clip(idx - span, 0, n), idx
    a_lo, a_hi = np.clip(idx + 1, 0, n), np.clip(idx + 1 + span, 0, n)
    before = (cumulative[b_hi] - cumulative[b_lo]) / np.maximum(b_hi - b_lo, 1)
    after = (cumulative[a_hi] - cumulative[a_lo]) / np.maximum(a_hi - a_lo, 1)
    size = int(round(period)) + 1
    spread = (maximum_filter1d(source, size) - minimum_filter1d(source, size))[idx]
    jump = np.zeros(idx.size)
    np.divide(after - before, spread, out=jump, where=spread > 0)
    return -0.5 * np.clip(jump, -1.0, 1.0)


def detect_yaga(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """GCIs from group-delay candidates of the multiscale product, selected with a closure cost."""
    settings = settings or DetectorSettings()
    prior = prior.at_rate(x.sample_rate_hz)
    if len(x) < 2**settings.yaga_levels:
        return GciSequence.empty(x.sample_rate_hz, "yaga")
    source = voice_source_estimate(x, settings.lpc)
    product = swt_multiscale_product(source, settings.yaga_levels)
    candidates = group_delay_candidates(x.with_samples(product.values), settings)
    times = np.array([c.time for c in candidates], dtype=np.float64)
    extra = settings.yaga_goi_weight * closure_costs(source.samples, times, prior.mean_period_samples)
    logger.debug(f"yaga: {len(candidates)} candidates from a depth-{product.depth} product")
    return dp_select(
        candidates,
        x,
        prior,
        settings.weights,
        beam_width=settings.beam_width,
        restart_gap_periods=settings.restart_gap_periods,
        similarity_signal=source.samples,
        extra_unary=extra,
        source="yaga",
    )
