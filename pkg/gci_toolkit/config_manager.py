"""Pitch priors, condition sweeps and run-time resolution of experiment configurations."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path

import numpy as np
from scipy.signal import correlate

from .dsp import lp_residual
from .evaluation import differenced_egg, reference_gcis
from .exceptions import ConfigurationError, SignalTooShortError
from .file_manager import load_waveform
from .methods import MethodRegistry
from .models import Condition, DatasetManifest, ExperimentConfig, LpcConfig, NoiseKind, NoiseSpec, RoomSpec
from .signals import MAX_F0_HZ, MIN_F0_HZ, FloatArray, PitchPrior, Waveform

logger = logging.getLogger(__name__)

Loader = Callable[[Path, float], Waveform]


def autocorrelation_f0(samples: FloatArray, sample_rate_hz: float) -> float:
    """f0 at the strongest autocorrelation lag within the supported pitch range."""
    centered = samples - samples.mean()
    n = centered.size
    lo = int(np.floor(sample_rate_hz / MAX_F0_HZ))
    hi = min(int(np.ceil(sample_rate_hz / MIN_F0_HZ)), n - 1)
    if hi <= lo:
        raise SignalTooShortError(f"{n} samples are too few to estimate f0")
    corr = correlate(centered, centered, mode="full", method="fft")[n - 1 :]
    lag = lo + int(np.argmax(corr[lo : hi + 1]))
    return sample_rate_hz / lag


def speech_f0(speech: Waveform, lpc: LpcConfig | None = None) -> float:
    """Mean f0 from the autocorrelation of the LP residual of a whole file."""
    return autocorrelation_f0(lp_residual(speech, lpc).samples, speech.sample_rate_hz)


def egg_f0(egg: Waveform) -> float | None:
    """Median f0 of the EGG cycles, or None when the EGG shows no closures."""
    fs = egg.sample_rate_hz
    peaks = np.clip(differenced_egg(egg), 0.0, None)
    if not np.any(peaks):
        return None
    rough = PitchPrior.from_f0(autocorrelation_f0(peaks, fs), fs)
    periods = np.diff(reference_gcis(egg, rough).instants)
    periods = periods[(periods >= fs / MAX_F0_HZ) & (periods <= fs / MIN_F0_HZ)]
    if periods.size == 0:
        return rough.f0_hz
    return float(fs / np.median(periods))


def speaker_priors(
    manifest: DatasetManifest, lpc: LpcConfig | None = None, loader: Loader = load_waveform
) -> dict[str, PitchPrior]:
    """One pitch prior per speaker.

    Configured values win. Otherwise the f0 is the median over the speaker's files of the
    EGG cycle estimate, falling back to the speech autocorrelation for files without EGG closures.
    Files that cannot be read or analysed are skipped; a speaker left without any estimate
    gets no prior.
    """
    fs = float(manifest.sample_rate_hz)
    priors: dict[str, PitchPrior] = {}
    for speaker in manifest.speakers:
        if speaker in manifest.speaker_f0_hz:
            priors[speaker] = PitchPrior.from_f0(manifest.speaker_f0_hz[speaker], fs)
            continue
        estimates: list[float] = []
        for entry in manifest.entries:
            if entry.speaker != speaker:
                continue
            try:
                estimate = egg_f0(loader(entry.egg, fs))
                if estimate is None:
                    estimate = speech_f0(loader(entry.speech, fs), lpc)
            except Exception as e:
                logger.warning(f"Skipping {entry.speech.stem} for the f0 of speaker {speaker}: {e}")
                continue
            estimates.append(estimate)
        if not estimates:
            logger.warning(f"Speaker {speaker}: no file gave an f0 estimate")
            continue
        f0 = float(np.clip(np.median(estimates), MIN_F0_HZ, MAX_F0_HZ))
        logger.debug(f"Speaker {speaker}: mean f0 {f0:.1f} Hz from {len(estimates)} files")
        priors[speaker] = PitchPrior.from_f0(f0, fs)
    return priors


def noise_sweep(
    snrs_db: Iterable[float],
    kind: NoiseKind = NoiseKind.WHITE_GAUSSIAN,
    noise_file: Path | None = None,
    seed: int = 0,
    include_clean: bool = True,
) -> list[Condition]:
    """Clean condition followed by one noise condition per SNR."""
    conditions = [Condition()] if include_clean else []
    for snr in snrs_db:
        spec = NoiseSpec(kind=kind, snr_db=snr, seed=seed, noise_file=noise_file)
        conditions.append(Condition(name=f"{kind.value}_{snr:g}dB", noise=spec))
    return conditions


def reverb_sweep(t60s_s: Iterable[float], room: RoomSpec | None = None) -> list[Condition]:
    """One reverberant condition per T60, all in the same room."""
    template = room or RoomSpec()
    return [
        Condition(name=f"t60_{1000 * t60:g}ms", room=template.model_copy(update={"t60_s": t60}))
        for t60 in t60s_s
    ]


class ConfigManager:
    """Resolves methods, conditions and pitch priors of an experiment."""

    def __init__(self, config: ExperimentConfig, loader: Loader = load_waveform):
        """Initialize config manager with an experiment configuration."""
        self.config = config
        self.loader = loader

    def get_methods(self, specific_methods: Sequence[str] | None = None) -> list[str]:
        """Methods to run, validated against the registry."""
        methods = list(specific_methods) if specific_methods else list(self.config.methods)
        for method in methods:
            if not MethodRegistry.is_valid(method):
                raise ConfigurationError(f"Invalid method: {method}. Available: {MethodRegistry.list_methods()}")
        return methods

    def get_conditions(self, names: Sequence[str] | None = None) -> list[Condition]:
        """Configured conditions, optionally restricted by name."""
        if not names:
            return list(self.config.conditions)
        by_name = {c.name: c for c in self.config.conditions}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise ConfigurationError(f"Unknown conditions: {missing}. Available: {list(by_name)}")
        return [by_name[n] for n in names]

    def seeded_condition(self, condition: Condition, file_index: int) -> Condition:
        """Condition whose noise seed depends on the run seed and the file position."""
        if condition.noise is None:
            return condition
        state = np.random.SeedSequence([self.config.seed, condition.noise.seed, file_index]).generate_state(1)
        noise = condition.noise.model_copy(update={"seed": int(state[0])})
        return condition.model_copy(update={"noise": noise})

    def speaker_priors(self) -> dict[str, PitchPrior]:
        return speaker_priors(self.config.manifest, self.config.detector.lpc, self.loader)
