"""Additive noise at a target segmental SNR and single-channel reverberation from source-image RIRs."""

from __future__ import annotations

import itertools
import logging
import math

import numpy as np
from scipy.signal import fftconvolve

from .exceptions import DegradationError
from .models import Condition, NoiseKind, NoiseSpec, RoomSpec
from .signals import FloatArray, Waveform

logger = logging.getLogger(__name__)

POWER_FLOOR = 1e-20


def _frame_powers(samples: FloatArray, frame: int) -> FloatArray:
    n_frames = max(1, samples.size // frame)
    usable = samples[: n_frames * frame] if samples.size >= frame else samples
    return np.maximum(np.mean(usable.reshape(n_frames, -1) ** 2, axis=1), POWER_FLOOR)


def segmental_snr(clean: FloatArray, noise: FloatArray, frame: int) -> float:
    """Mean per-frame SNR in dB over all frames, silent ones included."""
    ratio = _frame_powers(clean, frame) / _frame_powers(noise, frame)
    return float(np.mean(10.0 * np.log10(ratio)))


def noise_source(spec: NoiseSpec, num_samples: int, sample_rate_hz: float) -> FloatArray:
    """Unscaled noise of the requested kind, drawn from the noise seed."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == NoiseKind.WHITE_GAUSSIAN:
        return rng.standard_normal(num_samples)

    from .file_manager import load_waveform

    if spec.noise_file is None:
        raise DegradationError("External noise requires a noise_file")
    recording = load_waveform(spec.noise_file, sample_rate_hz).samples
    offset = int(rng.integers(recording.size))
    if recording.size < num_samples:
        logger.debug(f"Tiling {recording.size}-sample noise file over {num_samples} samples from offset {offset}")
    return recording[(offset + np.arange(num_samples)) % recording.size]


def add_noise(x: Waveform, spec: NoiseSpec) -> Waveform:
    """Add noise scaled by one global gain so the mean segmental SNR equals ``spec.snr_db``.

    Raises:
        DegradationError: If the input or the noise has no energy
    """
    if not np.any(x.samples):
        raise DegradationError("Cannot set an SNR on a zero-energy signal")
    noise = noise_source(spec, len(x), x.sample_rate_hz)
    if not np.any(noise):
        raise DegradationError("Noise source has no energy")
    frame = max(1, int(round(spec.frame_ms * x.sample_rate_hz / 1000.0)))
    # Mean segmental SNR falls by exactly 20 log10(g) when the noise is scaled by g.
    gain = 10.0 ** ((segmental_snr(x.samples, noise, frame) - spec.snr_db) / 20.0)
    logger.debug(f"Noise gain {gain:.3e} for {spec.snr_db:.1f} dB segmental SNR ({spec.kind.value})")
    return x.with_samples(x.samples + gain * noise)


def reflection_for_t60(room: RoomSpec) -> float:
    """Uniform wall reflection coefficient giving ``room.t60_s`` by the Eyring relation.

    Raises:
        DegradationError: If the Sabine absorption for this T60 would exceed 1
    """
    if room.reflection is not None:
        return room.reflection
    lx, ly, lz = room.dimensions_m
    volume = lx * ly * lz
    surface = 2 * (lx * ly + ly * lz + lx * lz)
    sabine = 24 * math.log(10) * volume / (room.speed_of_sound * surface * room.t60_s)
    if sabine >= 1:
        raise DegradationError(
            f"T60 of {room.t60_s:.3f} s is too short for a {lx}x{ly}x{lz} m room (absorption {sabine:.2f} > 1)"
        )
    absorption = 1.0 - math.exp(-sabine)
    return math.sqrt(1.0 - absorption)


def _axis_images(source: float, mic: float, size: float, order: int) -> tuple[FloatArray, FloatArray]:
    """Per-axis image offsets to the microphone and wall-reflection counts."""
    offsets: list[float] = []
    reflections: list[int] = []
    for r, p in itertools.product(range(-order, order + 1), (0, 1)):
        offsets.append((1 - 2 * p) * source + 2 * r * size - mic)
        reflections.append(abs(r - p) + abs(r))
    return np.array(offsets), np.array(reflections, dtype=np.float64)


def simulate_rir(room: RoomSpec, sample_rate_hz: float) -> FloatArray:
    """Source-image room impulse response with frequency-independent walls.

    Image delays are rounded to the nearest sample. The default length is the direct-path
    delay plus T60.
    """
    beta = reflection_for_t60(room)
    c = room.speed_of_sound
    direct = int(round(room.source_mic_distance / c * sample_rate_hz))
    length = room.rir_length or direct + int(math.ceil(room.t60_s * sample_rate_hz)) + 1
    reach = length / sample_rate_hz * c

    axes = []
    for source, mic, size in zip(room.source_m, room.mic_m, room.dimensions_m):
        order = int(math.ceil(reach / (2 * size))) + 1
        axes.append(_axis_images(source, mic, size, order))
    (dx, ex), (dy, ey), (dz, ez) = axes
    distance = np.sqrt(dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2).ravel()
    reflections = (ex[:, None, None] + ey[None, :, None] + ez[None, None, :]).ravel()

    delay = np.rint(distance / c * sample_rate_hz).astype(np.int64)
    keep = delay < length
    if room.max_order is not None:
        keep &= reflections <= room.max_order
    amplitude = np.power(beta, reflections[keep]) / (4 * math.pi * distance[keep])
    rir = np.bincount(delay[keep], weights=amplitude, minlength=length)[:length]
    logger.debug(f"RIR: {int(keep.sum())} images, reflection {beta:.3f}, {length} taps")
    return rir


def direct_path_delay(rir: FloatArray) -> int:
    """Index of the first nonzero tap."""
    nonzero = np.flatnonzero(rir)
    return int(nonzero[0]) if nonzero.size else 0


def convolve_rir(x: Waveform, rir: FloatArray) -> Waveform:
    """Full convolution, trimmed to the input length from the direct path and scaled to the input peak."""
    delay = direct_path_delay(rir)
    wet = np.asarray(fftconvolve(x.samples, rir), dtype=np.float64)[delay : delay + len(x)]
    peak = float(np.max(np.abs(wet)))
    if peak == 0:
        return x.with_samples(np.zeros(len(x)))
    return x.with_samples(wet * (float(np.max(np.abs(x.samples))) / peak))


def schroeder_decay_db(rir: FloatArray) -> FloatArray:
    """Backward-integrated energy decay curve in dB, 0 dB at the first tap."""
    energy = np.cumsum(rir[::-1] ** 2)[::-1]
    return 10.0 * np.log10(np.maximum(energy, POWER_FLOOR) / energy[0])


def measure_t60(rir: FloatArray, sample_rate_hz: float, start_db: float = -5.0, stop_db: float = -25.0) -> float:
    """T60 extrapolated from a line fitted to the decay curve between ``start_db`` and ``stop_db``."""
    decay = schroeder_decay_db(rir[direct_path_delay(rir) :])
    span = np.flatnonzero((decay <= start_db) & (decay >= stop_db))
    if span.size < 2:
        raise DegradationError("Decay curve too short to estimate T60")
    slope, _ = np.polyfit(span / sample_rate_hz, decay[span], 1)
    return float(-60.0 / slope)


def apply_condition(x: Waveform, condition: Condition) -> Waveform:
    """Reverberate then add noise, as configured."""
    if condition.room is not None:
        x = convolve_rir(x, simulate_rir(condition.room, x.sample_rate_hz))
    if condition.noise is not None:
        x = add_noise(x, condition.noise)
    return x
