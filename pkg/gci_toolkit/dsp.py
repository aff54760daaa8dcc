"""Shared numeric primitives: windows, linear prediction, envelopes and zero crossings."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from numpy.typing import ArrayLike
from scipy.signal import get_window, hilbert, lfilter

from .exceptions import ConfigurationError
from .models import LpcConfig, WindowShape, WindowSpec
from .signals import FloatArray, IntArray, LpcModel, Waveform

logger = logging.getLogger(__name__)

# Inputs longer than this are enveloped in overlapping blocks.
HILBERT_BLOCK_LIMIT = 2**22

_SCIPY_WINDOW_NAMES = {
    WindowShape.BLACKMAN: "blackman",
    WindowShape.HAMMING: "hamming",
    WindowShape.HANN: "hann",
    WindowShape.RECTANGULAR: "boxcar",
}


class CrossingDirection(str, Enum):
    """Zero-crossing direction."""

    NEGATIVE_GOING = "negative_going"
    POSITIVE_GOING = "positive_going"


def _as_samples(x: Waveform | ArrayLike) -> FloatArray:
    if isinstance(x, Waveform):
        return x.samples
    return np.asarray(x, dtype=np.float64).reshape(-1)


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def make_window(spec: WindowSpec) -> FloatArray:
    """Symmetric, nonnegative, max-normalized window of length 2N+1."""
    weights = np.asarray(get_window(_SCIPY_WINDOW_NAMES[spec.shape], spec.length, fftbins=False), dtype=np.float64)
    weights = np.clip(weights, 0.0, None)
    return weights / weights.max()


def make_periodic_window(shape: WindowShape, length: int) -> FloatArray:
    """Periodic window of any length, peaking at index ``length // 2``."""
    weights = np.asarray(get_window(_SCIPY_WINDOW_NAMES[shape], length, fftbins=True), dtype=np.float64)
    return np.clip(weights, 0.0, None)


def preemphasize(samples: FloatArray, coefficient: float) -> FloatArray:
    if coefficient == 0.0:
        return samples.copy()
    return np.asarray(lfilter([1.0, -coefficient], [1.0], samples), dtype=np.float64)


def levinson_durbin(autocorr: ArrayLike, order: int) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Levinson-Durbin recursion, vectorized over leading axes.

    Args:
        autocorr: Autocorrelation lags 0..order, shape (..., order + 1)
        order: Prediction order

    Returns:
        Tuple of (coefficients a_1..a_p, reflection coefficients, final prediction error).
        Frames with zero energy yield the identity model.
    """
    r = np.asarray(autocorr, dtype=np.float64)
    batch_shape = r.shape[:-1]
    r = r.reshape(-1, r.shape[-1])
    if r.shape[1] < order + 1:
        raise ConfigurationError(f"Need {order + 1} autocorrelation lags, got {r.shape[1]}")

    n_frames = r.shape[0]
    a = np.zeros((n_frames, order + 1))
    a[:, 0] = 1.0
    reflection = np.zeros((n_frames, order))
    err = r[:, 0] * (1.0 + 1e-9)
    active = err > 0

    for i in range(1, order + 1):
        acc = r[:, i] + np.sum(a[:, 1:i] * r[:, i - 1 : 0 : -1], axis=1)
        k = np.zeros(n_frames)
        np.divide(-acc, err, out=k, where=active)
        k = np.clip(k, -1.0 + 1e-12, 1.0 - 1e-12)
        previous = a[:, 1:i].copy()
        a[:, 1:i] = previous + k[:, None] * previous[:, ::-1]
        a[:, i] = k
        reflection[:, i - 1] = k
        err = err * (1.0 - k * k)
        active &= err > 0

    return (
        a[:, 1:].reshape(*batch_shape, order),
        reflection.reshape(*batch_shape, order),
        err.reshape(batch_shape),
    )


@dataclass(frozen=True)
class LpcTrack:
    """Per-frame prediction polynomials for a whole signal."""

    coefficients: FloatArray
    reflection: FloatArray
    frame_length: int
    hop: int

    @property
    def n_frames(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def order(self) -> int:
        return int(self.coefficients.shape[1])

    def frame_starts(self) -> IntArray:
        return np.arange(self.n_frames, dtype=np.int64) * self.hop

    def frame_of(self, positions: IntArray) -> IntArray:
        """Frame whose center is nearest to each sample position."""
        center = (self.frame_length - 1) / 2.0
        index = np.rint((positions - center) / self.hop).astype(np.int64)
        return np.clip(index, 0, self.n_frames - 1)

    def models(self) -> list[tuple[int, LpcModel]]:
        return [
            (int(start), LpcModel(self.coefficients[i], self.reflection[i]))
            for i, start in enumerate(self.frame_starts())
        ]


def analyze_frames(
    samples: FloatArray,
    order: int,
    frame_length: int,
    hop: int,
    window: WindowShape = WindowShape.HAMMING,
    chunk_frames: int = 4096,
) -> LpcTrack:
    """Autocorrelation LPC on every frame; the last partial frame is zero-padded."""
    if order < 1 or hop < 1:
        raise ConfigurationError(f"LPC order and hop must be positive (order={order}, hop={hop})")
    if order >= frame_length or frame_length <= 2 * order:
        raise ConfigurationError(f"LPC frame length {frame_length} too short for order {order}")

    n = samples.size
    n_frames = 1 if n <= frame_length else 1 + int(np.ceil((n - frame_length) / hop))
    padded = np.zeros((n_frames - 1) * hop + frame_length)
    padded[:n] = samples
    frames = sliding_window_view(padded, frame_length)[::hop]
    weights = np.asarray(get_window(_SCIPY_WINDOW_NAMES[window], frame_length, fftbins=False), dtype=np.float64)

    nfft = next_pow2(frame_length + order)
    autocorr = np.empty((n_frames, order + 1))
    for start in range(0, n_frames, chunk_frames):
        block = frames[start : start + chunk_frames] * weights
        spectrum = np.fft.rfft(block, nfft, axis=1)
        power = spectrum.real**2 + spectrum.imag**2
        autocorr[start : start + chunk_frames] = np.fft.irfft(power, nfft, axis=1)[:, : order + 1]

    coefficients, reflection, _ = levinson_durbin(autocorr, order)
    logger.debug(f"LPC analysis: {n_frames} frames, order {order}, frame {frame_length}, hop {hop}")
    return LpcTrack(coefficients, reflection, frame_length, hop)


def lpc_analyze(
    x: Waveform,
    order: int,
    frame_len: int,
    hop: int,
    preemphasis: float = 0.0,
    window: WindowShape = WindowShape.HAMMING,
) -> list[tuple[int, LpcModel]]:
    """Frame-wise LPC models as (frame_start, model) pairs."""
    if not 0.0 <= preemphasis < 1.0:
        raise ConfigurationError(f"Preemphasis must lie in [0, 1), got {preemphasis}")
    track = analyze_frames(preemphasize(x.samples, preemphasis), order, frame_len, hop, window)
    return track.models()


def prediction_error(samples: FloatArray, track: LpcTrack) -> FloatArray:
    """Apply A(z) with coefficients switched per frame (zero initial state)."""
    n = samples.size
    frame = track.frame_of(np.arange(n, dtype=np.int64))
    out = samples.copy()
    for lag in range(1, min(track.order, n - 1) + 1):
        out[lag:] += track.coefficients[frame[lag:], lag - 1] * samples[:-lag]
    return out


def inverse_filter(frame: FloatArray, model: LpcModel) -> FloatArray:
    """Prediction-error filtering of one frame with a single model."""
    return np.asarray(lfilter(model.polynomial, [1.0], frame), dtype=np.float64)


def synthesis_filter(excitation: FloatArray, model: LpcModel) -> FloatArray:
    """All-pole synthesis 1/A(z); exact inverse of ``inverse_filter``."""
    return np.asarray(lfilter([1.0], model.polynomial, excitation), dtype=np.float64)


@dataclass(frozen=True)
class LpAnalysis:
    """Preemphasized signal, its frame-wise LPC and the resulting residual."""

    preemphasized: FloatArray
    track: LpcTrack
    residual: FloatArray


def lp_analysis(x: Waveform, config: LpcConfig | None = None) -> LpAnalysis:
    config = config or LpcConfig()
    fs = x.sample_rate_hz
    emphasized = preemphasize(x.samples, config.preemphasis)
    track = analyze_frames(
        emphasized, config.resolve_order(fs), config.frame_length(fs), config.hop_length(fs), config.window
    )
    return LpAnalysis(emphasized, track, prediction_error(emphasized, track))


def lp_residual(x: Waveform, config: LpcConfig | None = None) -> Waveform:
    """LP residual of the preemphasized waveform; same length and rate as ``x``."""
    return x.with_samples(lp_analysis(x, config).residual)


def hilbert_envelope(x: Waveform) -> Waveform:
    """Magnitude of the analytic signal."""
    samples = x.samples
    if samples.size < 2:
        return x.with_samples(np.abs(samples))
    if samples.size <= HILBERT_BLOCK_LIMIT:
        return x.with_samples(np.abs(hilbert(samples)))
    return x.with_samples(_blocked_envelope(samples, HILBERT_BLOCK_LIMIT))


def _blocked_envelope(samples: FloatArray, block: int) -> FloatArray:
    hop = block // 2
    n = samples.size
    starts = list(range(0, n - block, hop)) + [n - block]
    phase = (np.arange(block) + 0.5) / block
    taper = 0.5 - 0.5 * np.cos(2 * np.pi * phase)
    acc = np.zeros(n)
    norm = np.zeros(n)
    for start in starts:
        segment = np.abs(hilbert(samples[start : start + block]))
        acc[start : start + block] += segment * taper
        norm[start : start + block] += taper
    logger.debug(f"Hilbert envelope computed in {len(starts)} blocks of {block} samples")
    return acc / norm


def zero_crossings(
    x: Waveform | ArrayLike,
    direction: CrossingDirection = CrossingDirection.NEGATIVE_GOING,
    inert: ArrayLike | None = None,
) -> FloatArray:
    """Fractional indices of sign changes between samples i and i+1.

    Negative-going means x[i] > 0 >= x[i+1]; positive-going means x[i] < 0 <= x[i+1].
    Crossings touching an inert sample are dropped.
    """
    values = _as_samples(x)
    if values.size < 2:
        return np.zeros(0)
    left, right = values[:-1], values[1:]
    if direction == CrossingDirection.NEGATIVE_GOING:
        hit = (left > 0) & (right <= 0)
    else:
        hit = (left < 0) & (right >= 0)
    if inert is not None:
        mask = np.asarray(inert, dtype=bool)
        hit &= ~mask[:-1] & ~mask[1:]
    index = np.flatnonzero(hit)
    return index + left[index] / (left[index] - right[index])


def local_minima(x: ArrayLike) -> IntArray:
    """Indices of local minima; a flat minimum reports the midpoint of its run."""
    values = np.asarray(x, dtype=np.float64)
    if values.size < 3:
        return np.zeros(0, dtype=np.int64)
    steps = np.flatnonzero(np.diff(values))
    if steps.size < 2:
        return np.zeros(0, dtype=np.int64)
    signs = np.sign(values[steps + 1] - values[steps])
    turns = np.flatnonzero((signs[:-1] < 0) & (signs[1:] > 0))
    left = steps[turns] + 1
    right = steps[turns + 1]
    return ((left + right) // 2).astype(np.int64)


def local_maxima(x: ArrayLike) -> IntArray:
    return local_minima(-np.asarray(x, dtype=np.float64))


def windowed_sum_at(samples: FloatArray, kernel: FloatArray, indices: IntArray, chunk: int = 4096) -> FloatArray:
    """Evaluate sum_m kernel[m + N] * x[n + m] at selected n, zero outside the signal.

    ``kernel`` has odd length 2N+1 along its first axis; a 2-D kernel evaluates several
    weightings at once and returns one column per weighting.
    """
    length = kernel.shape[0]
    half = (length - 1) // 2
    padded = np.pad(samples, half)
    view = sliding_window_view(padded, length)
    idx = np.asarray(indices, dtype=np.int64)
    out = np.empty((idx.size,) + kernel.shape[1:])
    for start in range(0, idx.size, chunk):
        out[start : start + chunk] = view[idx[start : start + chunk]] @ kernel
    return out


def truncated_weight(kernel: FloatArray, indices: IntArray, num_samples: int) -> FloatArray:
    """Sum of the kernel taps that fall inside the signal at each index."""
    half = (kernel.size - 1) // 2
    cumulative = np.concatenate(([0.0], np.cumsum(kernel)))
    idx = np.asarray(indices, dtype=np.int64)
    low = np.maximum(0, half - idx)
    high = np.minimum(kernel.size - 1, half + num_samples - 1 - idx)
    return cumulative[high + 1] - cumulative[low]


def coarse_level(requested: int, period_samples: float, min_ratio: float = 1.75) -> int:
    """Largest p <= requested whose 2**p grid still samples every cycle at least twice."""
    level = requested
    while level > 0 and 2**level > period_samples / min_ratio:
        level -= 1
    if level != requested:
        logger.warning(
            f"Coarse level p={requested} too large for a {period_samples:.1f}-sample period; using p={level}"
        )
    return level
