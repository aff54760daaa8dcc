"""Causal/anticausal decomposition of GCI-synchronous frames by complex cepstrum.

Each frame is zero-padded to ``fft_factor`` times its length and circularly shifted
so that its largest sample sits at index 0. The unwrapped phase has its integer
linear-phase term removed, so the remaining cepstrum splits into negative
quefrencies (maximum-phase, anticausal part) and the rest (minimum-phase part plus gain).
A frame counts as correctly decomposed when the spectral centre of gravity of its
anticausal part stays below a threshold (2.7 kHz by default).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from .dsp import make_periodic_window
from .exceptions import EvaluationError
from .models import MixedPhaseSettings
from .signals import MAX_F0_HZ, MIN_F0_HZ, FloatArray, GciSequence, PitchPrior, Waveform

logger = logging.getLogger(__name__)

DEFAULT_SWEEP_FACTORS = (1.0, 1.5, 2.0, 2.5, 3.0, 4.0)


@dataclass(frozen=True)
class ComplexCepstrum:
    """Real cepstral sequence of length ``n_fft`` with the removed linear phase and sign."""

    values: FloatArray
    delay_samples: int
    sign: float
    regularized: bool

    @property
    def n_fft(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class FrameDecomposition:
    """Anticausal and causal components of one frame, in frame coordinates.

    Both components have ``n_fft`` samples. The anticausal one ends at ``anchor`` (its
    earlier samples wrap from the end of the buffer when the support exceeds the frame);
    the causal one starts at ``anchor``.
    """

    anticausal: FloatArray
    causal: FloatArray
    spectral_cog_hz: float
    decomposed_ok: bool
    anchor: int
    delay_samples: int
    regularized: bool = False

    def reconstruct(self, length: int | None = None) -> FloatArray:
        """Circular convolution of the two components, shifted back onto the frame."""
        n = self.anticausal.size
        product = np.fft.irfft(np.fft.rfft(self.anticausal) * np.fft.rfft(self.causal), n)
        restored = np.roll(product, self.delay_samples - self.anchor)
        return restored if length is None else restored[:length]


@dataclass(frozen=True)
class MixedPhaseSummary:
    """Per-frame outcomes over one utterance."""

    cog_hz: FloatArray
    n_skipped: int
    n_regularized: int
    threshold_hz: float

    @property
    def n_frames(self) -> int:
        return int(self.cog_hz.size)

    @property
    def n_failed(self) -> int:
        return int(np.count_nonzero(self.cog_hz >= self.threshold_hz))

    @property
    def failure_rate_pct(self) -> float:
        if self.n_frames == 0:
            raise EvaluationError("No usable frames for mixed-phase decomposition")
        return 100.0 * self.n_failed / self.n_frames


def gci_sync_frame(
    x: Waveform, gci: float, local_period: float, settings: MixedPhaseSettings | None = None
) -> FloatArray | None:
    """Windowed frame of ``window_factor`` local periods with its window peak on ``gci``.

    Returns None when the frame would leave the signal.
    """
    settings = settings or MixedPhaseSettings()
    length = int(round(settings.window_factor * local_period))
    if length < 4:
        logger.debug(f"Skipping frame at {gci:.1f}: {length} samples is too short")
        return None
    start = int(round(gci)) - length // 2
    if start < 0 or start + length > len(x):
        logger.debug(f"Skipping frame at {gci:.1f}: [{start}, {start + length}) leaves the signal")
        return None
    return x.samples[start : start + length] * make_periodic_window(settings.window, length)


def complex_cepstrum(frame: FloatArray, n_fft: int, floor_ratio: float = 1e-10) -> ComplexCepstrum:
    """Complex cepstrum of an already anchored buffer.

    The magnitude is floored at ``floor_ratio`` times its peak. A negative DC sign is
    factored out before the linear phase is estimated from the phase at Nyquist.
    """
    spectrum = np.fft.rfft(frame, n_fft)
    magnitude = np.abs(spectrum)
    floor = floor_ratio * float(magnitude.max())
    regularized = bool(np.any(magnitude < floor))
    phase = np.unwrap(np.angle(spectrum))
    sign = 1.0
    if spectrum[0].real < 0:
        sign = -1.0
        phase = phase - phase[0]
    half = spectrum.size - 1
    delay = int(round(phase[half] / np.pi))
    phase = phase - np.pi * delay * np.arange(spectrum.size) / half
    log_spectrum = np.log(np.maximum(magnitude, floor)) + 1j * phase
    values = np.asarray(np.fft.irfft(log_spectrum, n_fft), dtype=np.float64)
    return ComplexCepstrum(values, -delay, sign, regularized)


def _from_cepstrum(part: FloatArray) -> FloatArray:
    return np.asarray(np.fft.irfft(np.exp(np.fft.rfft(part)), part.size), dtype=np.float64)


def spectral_centre_of_gravity(magnitude: FloatArray, sample_rate_hz: float, n_fft: int) -> float:
    """Amplitude-weighted mean frequency over [0, fs/2]."""
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate_hz)
    return float(np.sum(freqs * magnitude) / np.sum(magnitude))


def decompose(
    frame: FloatArray, sample_rate_hz: float, settings: MixedPhaseSettings | None = None
) -> FrameDecomposition:
    """Split a frame into its maximum-phase and minimum-phase components.

    Raises:
        ValueError: If the frame is all zeros
    """
    settings = settings or MixedPhaseSettings()
    frame = np.asarray(frame, dtype=np.float64)
    if not np.any(frame):
        raise ValueError("Cannot decompose an all-zero frame")
    n_fft = settings.fft_factor * frame.size
    anchor = int(np.argmax(np.abs(frame)))
    buffer = np.zeros(n_fft)
    buffer[: frame.size] = frame
    cepstrum = complex_cepstrum(np.roll(buffer, -anchor), n_fft, settings.floor_ratio)
    if cepstrum.regularized:
        logger.debug("Spectral zeros near the unit circle; magnitude floor applied")

    causal_part = cepstrum.values.copy()
    causal_part[n_fft // 2 :] = 0.0
    anticausal_part = cepstrum.values - causal_part

    anticausal_magnitude = np.exp(np.fft.rfft(anticausal_part).real)
    cog = spectral_centre_of_gravity(anticausal_magnitude, sample_rate_hz, n_fft)
    return FrameDecomposition(
        anticausal=np.roll(_from_cepstrum(anticausal_part), anchor),
        causal=cepstrum.sign * np.roll(_from_cepstrum(causal_part), anchor),
        spectral_cog_hz=cog,
        decomposed_ok=cog < settings.cog_threshold_hz,
        anchor=anchor,
        delay_samples=cepstrum.delay_samples,
        regularized=cepstrum.regularized,
    )


def local_periods(gcis: GciSequence, prior: PitchPrior | None = None) -> FloatArray:
    """Interval to the next GCI (the previous one for the last GCI).

    Intervals outside the plausible f0 range fall back to the prior mean period, or NaN.
    """
    g = gcis.instants
    if g.size < 2:
        fallback = np.nan if prior is None else prior.at_rate(gcis.sample_rate_hz).mean_period_samples
        return np.full(g.size, fallback)
    gaps = np.diff(g)
    periods = np.concatenate((gaps, gaps[-1:]))
    fs = gcis.sample_rate_hz
    plausible = (periods >= fs / MAX_F0_HZ) & (periods <= fs / MIN_F0_HZ)
    fallback = np.nan if prior is None else prior.at_rate(fs).mean_period_samples
    return np.where(plausible, periods, fallback)


def frame_decompositions(
    x: Waveform,
    gcis: GciSequence,
    settings: MixedPhaseSettings | None = None,
    prior: PitchPrior | None = None,
    offset_periods: float = 0.0,
) -> tuple[list[FrameDecomposition], int]:
    """Decompose one frame per GCI, optionally displaced by ``offset_periods`` local periods.

    Returns:
        Tuple of (decompositions, number of skipped GCIs)
    """
    settings = settings or MixedPhaseSettings()
    results: list[FrameDecomposition] = []
    skipped = 0
    for gci, period in zip(gcis.instants, local_periods(gcis, prior)):
        if not np.isfinite(period):
            skipped += 1
            continue
        frame = gci_sync_frame(x, gci + offset_periods * period, period, settings)
        if frame is None or not np.any(frame):
            skipped += 1
            continue
        results.append(decompose(frame, x.sample_rate_hz, settings))
    return results, skipped


def summarize(
    x: Waveform,
    gcis: GciSequence,
    settings: MixedPhaseSettings | None = None,
    prior: PitchPrior | None = None,
    offset_periods: float = 0.0,
) -> MixedPhaseSummary:
    """Centre-of-gravity values of every usable frame."""
    settings = settings or MixedPhaseSettings()
    frames, skipped = frame_decompositions(x, gcis, settings, prior, offset_periods)
    n_regularized = sum(f.regularized for f in frames)
    if n_regularized:
        logger.warning(f"Magnitude floor applied on {n_regularized} of {len(frames)} frames")
    if skipped:
        logger.debug(f"Skipped {skipped} frames at the signal edges or without a usable period")
    cog = np.array([f.spectral_cog_hz for f in frames], dtype=np.float64)
    return MixedPhaseSummary(cog, skipped, n_regularized, settings.cog_threshold_hz)


def failure_rate(
    x: Waveform,
    gcis: GciSequence,
    settings: MixedPhaseSettings | None = None,
    prior: PitchPrior | None = None,
    offset_periods: float = 0.0,
) -> float:
    """Percentage of frames whose anticausal centre of gravity reaches the threshold.

    Raises:
        EvaluationError: If no frame could be decomposed
    """
    return summarize(x, gcis, settings, prior, offset_periods).failure_rate_pct


def window_length_sweep(
    x: Waveform,
    gcis: GciSequence,
    factors: Iterable[float] = DEFAULT_SWEEP_FACTORS,
    settings: MixedPhaseSettings | None = None,
    prior: PitchPrior | None = None,
) -> dict[float, float]:
    """Failure rate for each frame length, in local periods."""
    settings = settings or MixedPhaseSettings()
    sweep: dict[float, float] = {}
    for factor in factors:
        sweep[float(factor)] = failure_rate(x, gcis, settings.model_copy(update={"window_factor": factor}), prior)
        logger.debug(f"Window factor {factor}: failure rate {sweep[float(factor)]:.1f}%")
    return sweep
