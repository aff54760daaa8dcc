"""Zero-frequency resonator detector."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.signal import lfilter

from .dsp import CrossingDirection, zero_crossings
from .exceptions import SignalTooShortError, UnstableFilterError
from .models import DetectorSettings, WindowShape, WindowSpec
from .signals import FloatArray, GciSequence, PitchPrior, Waveform

logger = logging.getLogger(__name__)

TREND_PASSES = 3
BLOCK_SECONDS = 1.0


@dataclass(frozen=True)
class ZfrSignal:
    """Trend-removed output of the cascaded zero-frequency resonators."""

    values: FloatArray
    trend_window_samples: int


def zero_frequency_resonate(samples: FloatArray, printed_sign: bool = False) -> NDArray[np.floating]:
    """Pass a signal twice through a resonator with a double pole at zero frequency.

    Each ideal resonator is two running sums, so the cascade is four cumulative sums in
    extended precision. ``printed_sign`` uses y(n) = x(n) + 2y(n-1) + y(n-2) instead,
    whose poles lie off the unit circle.
    """
    if printed_sign:
        with np.errstate(over="ignore", invalid="ignore"):
            y = lfilter([1.0], [1.0, -2.0, -1.0], lfilter([1.0], [1.0, -2.0, -1.0], samples))
        if not np.all(np.isfinite(y)):
            raise UnstableFilterError(
                f"Resonator y(n) = x(n) + 2y(n-1) + y(n-2) diverged on {samples.size} samples"
            )
        return np.asarray(y, dtype=np.longdouble)
    y = np.asarray(samples, dtype=np.longdouble)
    for _ in range(4):
        y = np.cumsum(y)
    return y


def remove_trend(values: NDArray[np.floating], half_length: int, passes: int = TREND_PASSES) -> NDArray[np.floating]:
    """Subtract the local mean over 2N+1 samples, ``passes`` times.

    Windows are truncated at the boundaries and averaged over the samples they cover.
    """
    n = values.size
    idx = np.arange(n)
    lo = np.clip(idx - half_length, 0, n)
    hi = np.clip(idx + half_length + 1, 0, n)
    count = (hi - lo).astype(values.dtype)
    out = values
    for _ in range(passes):
        cumulative = np.concatenate((np.zeros(1, dtype=out.dtype), np.cumsum(out)))
        out = out - (cumulative[hi] - cumulative[lo]) / count
    return out


def _trend_removed(segment: FloatArray, half_length: int, printed_sign: bool) -> FloatArray:
    return np.asarray(remove_trend(zero_frequency_resonate(segment, printed_sign), half_length), dtype=np.float64)


def _blockwise(differenced: FloatArray, half_length: int, block: int, printed_sign: bool) -> FloatArray:
    """Run the resonator and trend removal in overlapping blocks, cross-fading at block edges.

    Each block starts from a zero resonator state; the difference to the continuous state
    is a cubic in n, which three mean removals cancel away from the block edges.
    """
    n = differenced.size
    margin = TREND_PASSES * (2 * half_length + 1)
    if n <= block + 2 * margin:
        return _trend_removed(differenced, half_length, printed_sign)

    fade = max(1, half_length)
    out = np.zeros(n)
    starts = list(range(0, n, block))
    for start in starts:
        stop = min(n, start + block)
        lo, hi = max(0, start - margin), min(n, stop + margin)
        segment = _trend_removed(differenced[lo:hi], half_length, printed_sign)
        positions = np.arange(lo, hi, dtype=np.float64)
        weight = np.ones(hi - lo)
        if start > 0:
            weight *= np.clip((positions - (start - fade)) / (2 * fade), 0.0, 1.0)
        if stop < n:
            weight *= np.clip(((stop + fade) - positions) / (2 * fade), 0.0, 1.0)
        out[lo:hi] += weight * segment
    logger.debug(f"ZFR processed in {len(starts)} blocks of {block} samples (margin {margin})")
    return out


def zfr_signal(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> ZfrSignal:
    """Differenced speech through two zero-frequency resonators, then three trend removals."""
    settings = settings or DetectorSettings()
    prior = prior.at_rate(x.sample_rate_hz)
    window = WindowSpec.for_period(prior.mean_period_samples, settings.zfr_window_factor, WindowShape.RECTANGULAR)
    if len(x) <= TREND_PASSES * window.length:
        raise SignalTooShortError(
            f"ZFR needs more than {TREND_PASSES * window.length} samples for a {window.length}-sample window, "
            f"got {len(x)}"
        )
    differenced = np.diff(x.samples, prepend=0.0)
    block = max(1, int(round(BLOCK_SECONDS * x.sample_rate_hz)))
    values = _blockwise(differenced, window.half_length, block, settings.zfr_printed_sign)
    return ZfrSignal(values, window.length)


def detect_zfr(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """GCIs at positive-going zero crossings of the ZFR signal."""
    signal = zfr_signal(x, prior, settings)
    crossings = zero_crossings(signal.values, CrossingDirection.POSITIVE_GOING)
    logger.debug(f"zfr: {crossings.size} positive-going crossings, window {signal.trend_window_samples}")
    return GciSequence(crossings, x.sample_rate_hz, "zfr")
