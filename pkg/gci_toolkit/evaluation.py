"""Reference GCIs from the EGG, speech/EGG alignment and cycle-based performance measures."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import gaussian_filter1d, maximum_filter1d
from scipy.signal import correlate, correlation_lags, find_peaks

from .dsp import hilbert_envelope, lp_residual
from .exceptions import AlignmentError, EvaluationError
from .models import EvalReport, LpcConfig
from .signals import FloatArray, GciSequence, PitchPrior, Waveform

logger = logging.getLogger(__name__)

MIN_CYCLE_MS = 2.0
MAX_CYCLE_MS = 20.0
PEAK_TO_MEDIAN = 3.0
MIN_CONFIDENCE = 0.2


def differenced_egg(egg: Waveform) -> FloatArray:
    """First difference of the EGG, same length as the input."""
    return np.diff(egg.samples, prepend=egg.samples[0])


def reference_gcis(egg: Waveform, prior: PitchPrior) -> GciSequence:
    """Greatest positive dEGG peaks, one per cycle, above a threshold tracking the local maximum."""
    degg = differenced_egg(egg)
    positive = np.clip(degg, 0.0, None)
    top = float(positive.max())
    if top <= 0:
        return GciSequence.empty(egg.sample_rate_hz, "egg")
    period = prior.at_rate(egg.sample_rate_hz).mean_period_samples
    local_max = maximum_filter1d(positive, size=2 * int(round(period)) + 1)
    height = np.maximum(0.25 * local_max, 1e-3 * top)
    peaks, _ = find_peaks(degg, height=height, distance=max(1, int(0.5 * period)))
    logger.debug(f"Found {peaks.size} dEGG peaks")
    return GciSequence(peaks.astype(np.float64), egg.sample_rate_hz, "egg")


@dataclass(frozen=True)
class ReferenceCycles:
    """Glottal cycles around reference GCIs, bounded by midpoints between consecutive GCIs."""

    ref_gcis: GciSequence
    boundaries: FloatArray
    voiced: NDArray[np.bool_]

    @property
    def n_voiced(self) -> int:
        return int(np.count_nonzero(self.voiced))

    def shifted(self, offset_samples: float) -> ReferenceCycles:
        return ReferenceCycles(self.ref_gcis.shifted(offset_samples), self.boundaries + offset_samples, self.voiced)


def build_cycles(ref: GciSequence, degg: FloatArray | None = None) -> ReferenceCycles:
    """Cycle extents and voicing mask.

    The first and last cycles extend half the adjacent period beyond their GCI. A cycle is
    voiced when its extent lies in [2, 20] ms and, given the dEGG, its peak exceeds three times
    the median absolute dEGG.
    """
    g = ref.instants
    if g.size < 2:
        return ReferenceCycles(ref, np.zeros(0), np.zeros(0, dtype=bool))
    midpoints = 0.5 * (g[:-1] + g[1:])
    first = g[0] - 0.5 * (g[1] - g[0])
    last = g[-1] + 0.5 * (g[-1] - g[-2])
    boundaries = np.concatenate(([first], midpoints, [last]))
    extent_ms = 1000.0 * np.diff(boundaries) / ref.sample_rate_hz
    voiced = (extent_ms >= MIN_CYCLE_MS) & (extent_ms <= MAX_CYCLE_MS)
    if degg is not None:
        floor = PEAK_TO_MEDIAN * float(np.median(np.abs(degg)))
        idx = np.clip(ref.rounded(), 0, degg.size - 1)
        voiced &= degg[idx] > floor
    return ReferenceCycles(ref, boundaries, voiced)


def evaluate(
    ref: ReferenceCycles, est: GciSequence, method: str | None = None, condition: str = "clean"
) -> EvalReport:
    """Count estimates per voiced cycle: none is a miss, one an identification, more a false alarm."""
    if ref.n_voiced == 0:
        raise EvaluationError("No voiced reference cycles to evaluate against")
    lower = np.searchsorted(est.instants, ref.boundaries[:-1], side="left")
    upper = np.searchsorted(est.instants, ref.boundaries[1:], side="left")
    counts = (upper - lower)[ref.voiced]
    identified = counts == 1
    first = lower[ref.voiced][identified]
    errors_ms = 1000.0 * (est.instants[first] - ref.ref_gcis.instants[ref.voiced][identified]) / est.sample_rate_hz
    return EvalReport.from_outcomes(
        method or est.source,
        condition,
        int(np.count_nonzero(identified)),
        int(np.count_nonzero(counts == 0)),
        int(np.count_nonzero(counts > 1)),
        errors_ms,
    )


def estimate_delay(
    reference: FloatArray, delayed: FloatArray, max_lag: int, min_confidence: float = MIN_CONFIDENCE
) -> tuple[int, float]:
    """Lag of ``delayed`` behind ``reference`` maximizing their normalized cross-correlation.

    Raises:
        AlignmentError: If the best normalized correlation within +/- max_lag is below ``min_confidence``
    """
    a = reference - reference.mean()
    b = delayed - delayed.mean()
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0:
        raise AlignmentError("Cannot align signals without variation")
    corr = correlate(b, a, mode="full", method="fft")
    lags = correlation_lags(b.size, a.size, mode="full")
    window = np.abs(lags) <= max_lag
    best = int(np.argmax(corr[window]))
    lag = int(lags[window][best])
    confidence = float(corr[window][best]) / norm
    if confidence < min_confidence:
        raise AlignmentError(
            f"Best correlation {confidence:.3f} at lag {lag} is below {min_confidence}; provide a manual delay"
        )
    return lag, confidence


def align_egg(
    speech: Waveform,
    egg: Waveform,
    max_lag_ms: float = 10.0,
    lpc: LpcConfig | None = None,
    min_confidence: float = MIN_CONFIDENCE,
) -> int:
    """Constant delay (samples) of the speech behind the EGG.

    Correlates the positive dEGG peak train with the Hilbert envelope of the LP residual.
    """
    if speech.sample_rate_hz != egg.sample_rate_hz:
        raise AlignmentError(f"Sample rates differ: {speech.sample_rate_hz} vs {egg.sample_rate_hz}")
    n = min(len(speech), len(egg))
    peaks = gaussian_filter1d(np.clip(differenced_egg(egg)[:n], 0.0, None), sigma=1.0)
    envelope = gaussian_filter1d(hilbert_envelope(lp_residual(speech, lpc)).samples[:n], sigma=1.0)
    max_lag = int(round(max_lag_ms * speech.sample_rate_hz / 1000.0))
    lag, confidence = estimate_delay(peaks, envelope, max_lag, min_confidence)
    logger.debug(f"EGG alignment: speech lags by {lag} samples (confidence {confidence:.3f})")
    return lag
