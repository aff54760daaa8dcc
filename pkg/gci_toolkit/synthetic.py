"""Synthetic voiced speech with known glottal closure instants.

Utterances are built from a glottal flow derivative pulse train through a random
all-pole vocal tract, with a matching electroglottograph (EGG) signal. The suite
makes the detectors and the evaluation runnable without recorded corpora.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.signal import freqz, lfilter

from .signals import FloatArray, GciSequence, PitchPrior, Waveform

logger = logging.getLogger(__name__)

DEFAULT_SUITE_F0_HZ = (100.0, 160.0, 220.0)
RISE_FRACTION = 0.65
REFERENCE_CYCLE = 2000


@dataclass(frozen=True)
class SyntheticUtterance:
    """Speech and EGG pair with the true GCIs of both."""

    name: str
    speech: Waveform
    egg: Waveform
    gcis: GciSequence
    egg_gcis: GciSequence
    excitation: FloatArray
    f0_hz: float
    larynx_delay_samples: int

    @property
    def prior(self) -> PitchPrior:
        return PitchPrior.from_f0(self.f0_hz, self.speech.sample_rate_hz)


def glottal_cycle(length: int, open_quotient: float) -> FloatArray:
    """Flow derivative over one cycle: closed phase, opening, closing, then an abrupt return to 0.

    The cycle starts right after a closure; the next closure falls at index ``length``.
    """
    t = np.arange(length, dtype=np.float64)
    open_length = open_quotient * length
    rise = RISE_FRACTION * open_length
    fall = open_length - rise
    tau = t - (length - open_length)
    derivative = np.zeros(length)
    opening = (tau >= 0) & (tau < rise)
    closing = tau >= rise
    derivative[opening] = (math.pi / (2 * rise)) * np.sin(math.pi * tau[opening] / rise)
    derivative[closing] = -(math.pi / (2 * fall)) * np.sin(math.pi * (tau[closing] - rise) / (2 * fall))
    return derivative


def _fundamental_minimum(open_quotient: float) -> float:
    """Position of the fundamental's minimum in a cycle, as a fraction of the period."""
    cycle = glottal_cycle(REFERENCE_CYCLE, open_quotient)
    coefficient = np.sum(cycle * np.exp(-2j * math.pi * np.arange(REFERENCE_CYCLE) / REFERENCE_CYCLE))
    return float(((math.pi - np.angle(coefficient)) / (2 * math.pi)) % 1.0)


@lru_cache(maxsize=64)
def open_quotient_for(target_fraction: float) -> float:
    """Open quotient placing the fundamental minimum of the flow derivative at ``target_fraction``."""

    def offset(open_quotient: float) -> float:
        return (_fundamental_minimum(open_quotient) - target_fraction + 0.5) % 1.0 - 0.5

    return float(brentq(offset, 0.3, 0.95, xtol=1e-6))


def vocal_tract(sample_rate_hz: float, rng: np.random.Generator, n_formants: int = 5) -> FloatArray:
    """Random stable all-pole tract A(z) with formants near the neutral tube resonances."""
    poles: list[complex] = []
    nyquist = sample_rate_hz / 2
    for k in range(n_formants):
        formant = 500.0 * (2 * k + 1) * rng.uniform(0.9, 1.1)
        if formant >= 0.9 * nyquist:
            break
        bandwidth = rng.uniform(60.0, 200.0)
        radius = math.exp(-math.pi * bandwidth / sample_rate_hz)
        poles.append(radius * np.exp(2j * math.pi * formant / sample_rate_hz))
    roots = np.concatenate([np.array(poles), np.conj(np.array(poles))]) if poles else np.zeros(0)
    return np.real(np.poly(roots)) if roots.size else np.array([1.0])


def _closure_instants(n_cycles: int, period: float, jitter: float, start: int, rng: np.random.Generator) -> np.ndarray:
    lengths = np.rint(period * (1.0 + rng.uniform(-jitter, jitter, n_cycles))).astype(np.int64)
    return start + np.concatenate(([0], np.cumsum(lengths)))


def _egg_track(num_samples: int, closures: np.ndarray, open_quotient: float) -> FloatArray:
    """Contact signal: sharp rise at each closure, plateau, smooth release during the open phase."""
    egg = np.zeros(num_samples)
    for k in range(1, closures.size):
        g = int(closures[k])
        following = int(closures[k + 1]) if k + 1 < closures.size else g + int(closures[k] - closures[k - 1])
        period = following - g
        release_start = g + max(3, int(round((1.0 - open_quotient) * period)))
        release_length = max(2, int(round(0.5 * open_quotient * period)))
        stop = min(num_samples, release_start + release_length)
        egg[g : min(num_samples, g + 3)] = [0.7, 0.9, 1.0][: max(0, min(num_samples, g + 3) - g)]
        egg[min(num_samples, g + 3) : min(num_samples, release_start)] = 1.0
        if release_start < stop:
            phase = np.arange(stop - release_start) / release_length
            egg[release_start:stop] = 0.5 * (1.0 + np.cos(math.pi * phase))
    return egg


def synthetic_vowel(
    f0_hz: float = 100.0,
    duration_s: float = 1.0,
    sample_rate_hz: float = 16000.0,
    jitter: float = 0.03,
    seed: int = 0,
    source_phase: float = 0.05,
    larynx_delay_samples: int = 0,
    noise_floor_db: float | None = -60.0,
    padding_s: float = 0.05,
    name: str | None = None,
) -> SyntheticUtterance:
    """Voiced segment framed by silence, with the EGG it would produce.

    ``source_phase`` places the minimum of the speech fundamental that fraction of a
    period before each closure. ``larynx_delay_samples`` delays the speech relative to the EGG.
    """
    rng = np.random.default_rng(seed)
    period = sample_rate_hz / f0_hz
    tract = vocal_tract(sample_rate_hz, rng)
    _, response = freqz([1.0], tract, worN=[f0_hz], fs=sample_rate_hz)
    tract_lag = -float(np.angle(response[0])) / (2 * math.pi)
    open_quotient = open_quotient_for(round((1.0 - source_phase - tract_lag) % 1.0, 4))

    pad = int(round(padding_s * sample_rate_hz))
    n_cycles = max(2, int(duration_s * f0_hz))
    closures = _closure_instants(n_cycles, period, jitter, pad, rng)
    num_samples = int(closures[-1]) + pad + larynx_delay_samples

    excitation = np.zeros(num_samples)
    for k in range(n_cycles):
        start, stop = int(closures[k]), int(closures[k + 1])
        excitation[start:stop] = glottal_cycle(stop - start, open_quotient) * (stop - start) / period

    raw = np.asarray(lfilter([1.0], tract, excitation), dtype=np.float64)
    speech = np.zeros(num_samples)
    speech[larynx_delay_samples:] = raw[: num_samples - larynx_delay_samples]
    speech *= 0.5 / np.max(np.abs(speech))
    if noise_floor_db is not None:
        speech += rng.normal(0.0, 10 ** (noise_floor_db / 20.0) * 0.5, num_samples)

    egg = _egg_track(num_samples, closures, open_quotient)
    egg_gcis = GciSequence(closures[1:].astype(np.float64), sample_rate_hz, "egg")
    label = name or f"vowel_f{int(round(f0_hz))}_s{seed}"
    logger.debug(f"Synthesized {label}: {n_cycles} cycles, open quotient {open_quotient:.3f}")
    return SyntheticUtterance(
        name=label,
        speech=Waveform(speech, sample_rate_hz),
        egg=Waveform(egg, sample_rate_hz),
        gcis=egg_gcis.shifted(larynx_delay_samples).relabeled("truth"),
        egg_gcis=egg_gcis,
        excitation=excitation,
        f0_hz=f0_hz,
        larynx_delay_samples=larynx_delay_samples,
    )


def impulse_train_vowel(
    f0_hz: float = 100.0,
    duration_s: float = 1.0,
    sample_rate_hz: float = 16000.0,
    seed: int = 0,
    jitter: float = 0.0,
) -> SyntheticUtterance:
    """Vowel excited by positive unit impulses at the closures (no glottal pulse shape)."""
    rng = np.random.default_rng(seed)
    period = sample_rate_hz / f0_hz
    tract = vocal_tract(sample_rate_hz, rng)
    pad = int(round(0.05 * sample_rate_hz))
    n_cycles = max(2, int(duration_s * f0_hz))
    closures = _closure_instants(n_cycles, period, jitter, pad, rng)
    num_samples = int(closures[-1]) + pad
    excitation = np.zeros(num_samples)
    excitation[closures[1:]] = 1.0
    speech = np.asarray(lfilter([1.0], tract, excitation), dtype=np.float64)
    speech *= 0.5 / np.max(np.abs(speech))
    gcis = GciSequence(closures[1:].astype(np.float64), sample_rate_hz, "truth")
    egg = _egg_track(num_samples, closures, 0.6)
    return SyntheticUtterance(
        name=f"impulses_f{int(round(f0_hz))}_s{seed}",
        speech=Waveform(speech, sample_rate_hz),
        egg=Waveform(egg, sample_rate_hz),
        gcis=gcis,
        egg_gcis=gcis.relabeled("egg"),
        excitation=excitation,
        f0_hz=f0_hz,
        larynx_delay_samples=0,
    )


def synthetic_suite(
    total_s: float = 60.0,
    utterance_s: float = 2.0,
    sample_rate_hz: float = 16000.0,
    f0s_hz: tuple[float, ...] = DEFAULT_SUITE_F0_HZ,
    seed: int = 0,
    larynx_delay_samples: int = 0,
) -> list[SyntheticUtterance]:
    """Utterances cycling through ``f0s_hz`` until ``total_s`` seconds of voicing are reached."""
    count = max(1, int(math.ceil(total_s / utterance_s)))
    return [
        synthetic_vowel(
            f0_hz=f0s_hz[i % len(f0s_hz)],
            duration_s=utterance_s,
            sample_rate_hz=sample_rate_hz,
            seed=seed + i,
            larynx_delay_samples=larynx_delay_samples,
            name=f"utt{i:03d}_f{int(round(f0s_hz[i % len(f0s_hz)]))}",
        )
        for i in range(count)
    ]


def maximum_phase_pulse(
    open_length: int, sample_rate_hz: float, formant_hz: float = 200.0, bandwidth_hz: float = 150.0
) -> FloatArray:
    """Anticausal glottal pulse: a time-reversed low resonance ending at -1 on the closure sample."""
    radius = math.exp(-math.pi * bandwidth_hz / sample_rate_hz)
    theta = 2 * math.pi * formant_hz / sample_rate_hz
    m = np.arange(open_length, dtype=np.float64)
    response = radius**m * np.sin(theta * (m + 1)) / math.sin(theta)
    taper = np.ones(open_length)
    fade = max(1, open_length // 4)
    taper[-fade:] = 0.5 * (1.0 + np.cos(math.pi * np.arange(1, fade + 1) / fade))
    return -(response * taper)[::-1]


def mixed_phase_frame(
    sample_rate_hz: float = 16000.0, f0_hz: float = 120.0, seed: int = 0, response_length: int = 256
) -> tuple[FloatArray, FloatArray, int]:
    """Known anticausal pulse convolved with a minimum-phase tract response.

    Returns:
        Tuple of (frame, anticausal pulse, index of the closure sample in the frame)
    """
    rng = np.random.default_rng(seed)
    pulse = maximum_phase_pulse(int(round(0.6 * sample_rate_hz / f0_hz)), sample_rate_hz)
    impulse = np.zeros(response_length)
    impulse[0] = 1.0
    response = np.asarray(lfilter([1.0], vocal_tract(sample_rate_hz, rng), impulse), dtype=np.float64)
    return np.convolve(pulse, response), pulse, pulse.size - 1


def mixed_phase_speech(
    f0_hz: float = 120.0,
    duration_s: float = 1.0,
    sample_rate_hz: float = 16000.0,
    seed: int = 0,
    jitter: float = 0.01,
) -> SyntheticUtterance:
    """Speech whose glottal source is purely anticausal up to each closure."""
    rng = np.random.default_rng(seed)
    period = sample_rate_hz / f0_hz
    tract = vocal_tract(sample_rate_hz, rng)
    pad = int(round(0.05 * sample_rate_hz))
    n_cycles = max(2, int(duration_s * f0_hz))
    closures = _closure_instants(n_cycles, period, jitter, pad, rng)
    num_samples = int(closures[-1]) + pad
    excitation = np.zeros(num_samples)
    for k in range(1, closures.size):
        g = int(closures[k])
        pulse = maximum_phase_pulse(int(round(0.6 * (closures[k] - closures[k - 1]))), sample_rate_hz)
        excitation[g - pulse.size + 1 : g + 1] += pulse
    speech = np.asarray(lfilter([1.0], tract, excitation), dtype=np.float64)
    speech *= 0.5 / np.max(np.abs(speech))
    gcis = GciSequence(closures[1:].astype(np.float64), sample_rate_hz, "truth")
    egg = _egg_track(num_samples, closures, 0.6)
    return SyntheticUtterance(
        name=f"mixedphase_f{int(round(f0_hz))}_s{seed}",
        speech=Waveform(speech, sample_rate_hz),
        egg=Waveform(egg, sample_rate_hz),
        gcis=gcis,
        egg_gcis=gcis.relabeled("egg"),
        excitation=excitation,
        f0_hz=f0_hz,
        larynx_delay_samples=0,
    )
