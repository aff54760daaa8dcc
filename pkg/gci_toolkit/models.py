"""Data models for detector settings, degradations, datasets and reports."""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator

from .signals import FloatArray


class WindowShape(str, Enum):
    """Supported analysis window shapes."""

    BLACKMAN = "blackman"
    HAMMING = "hamming"
    HANN = "hann"
    RECTANGULAR = "rectangular"


class WindowSpec(BaseModel):
    """Symmetric window of odd length 2N+1."""

    shape: WindowShape = Field(default=WindowShape.BLACKMAN, description="Window shape")
    half_length: int = Field(..., ge=1, description="Half length N; the window spans 2N+1 samples")

    model_config = {"frozen": True}

    @property
    def length(self) -> int:
        return 2 * self.half_length + 1

    @classmethod
    def for_period(cls, period_samples: float, factor: float, shape: WindowShape = WindowShape.BLACKMAN) -> WindowSpec:
        """Window spanning ``factor`` pitch periods, rounded up to an odd length."""
        length = max(3, math.ceil(factor * period_samples))
        if length % 2 == 0:
            length += 1
        return cls(shape=shape, half_length=(length - 1) // 2)


class LpcConfig(BaseModel):
    """Frame-based linear prediction settings."""

    order: int | None = Field(default=None, ge=1, description="Prediction order (default: 2 + rate/1000)")
    frame_ms: float = Field(default=25.0, gt=0, description="Analysis frame length in milliseconds")
    hop_ms: float = Field(default=5.0, gt=0, description="Frame hop in milliseconds")
    window: WindowShape = Field(default=WindowShape.HAMMING, description="Analysis window shape")
    preemphasis: float = Field(default=0.97, ge=0.0, lt=1.0, description="Preemphasis coefficient")

    def resolve_order(self, sample_rate_hz: float) -> int:
        if self.order is not None:
            return self.order
        return int(round(2 + sample_rate_hz / 1000.0))

    def frame_length(self, sample_rate_hz: float) -> int:
        return max(1, int(round(self.frame_ms * sample_rate_hz / 1000.0)))

    def hop_length(self, sample_rate_hz: float) -> int:
        return max(1, int(round(self.hop_ms * sample_rate_hz / 1000.0)))


class CostWeights(BaseModel):
    """Weights of the five candidate cost elements used by dynamic-programming selection."""

    amplitude: float = Field(default=0.8, ge=0, description="Waveform similarity weight")
    pitch: float = Field(default=0.5, ge=0, description="Pitch deviation weight")
    projected: float = Field(default=0.4, ge=0, description="Projected-candidate weight")
    energy: float = Field(default=0.3, ge=0, description="Normalized energy weight")
    slope: float = Field(default=0.1, ge=0, description="Phase-slope deviation weight")

    def as_array(self) -> FloatArray:
        return np.array([self.amplitude, self.pitch, self.projected, self.energy, self.slope])


class DetectorSettings(BaseModel):
    """Tunable parameters shared by the detectors."""

    lpc: LpcConfig = Field(default_factory=LpcConfig, description="Linear prediction settings")
    weights: CostWeights = Field(default_factory=CostWeights, description="Dynamic programming cost weights")
    he_window_factor: float = Field(default=1.1, gt=0, description="HE window length in mean pitch periods")
    he_merge_factor: float = Field(
        default=0.2, ge=0, description="HE crossings closer than this many mean periods are merged"
    )
    zfr_window_factor: float = Field(default=1.5, gt=0, description="ZFR trend-removal window in mean periods")
    zfr_printed_sign: bool = Field(
        default=False, description="Use y(n) = x(n) + 2y(n-1) + y(n-2) instead of the ideal double pole at z = 1"
    )
    sedreams_window_factor: float = Field(
        default=1.75, gt=0, description="Mean-based signal window length in mean pitch periods"
    )
    interval_factor: float = Field(
        default=0.35, gt=0, lt=1, description="Interval of presence length as a fraction of the local period"
    )
    fast_level: int = Field(default=4, ge=0, le=8, description="Coarse grid exponent p for the fast variants")
    max_f0_hz: float = Field(default=500.0, gt=0, description="Maximum expected f0 for the group delay window")
    group_delay_factor: float = Field(
        default=1.2, gt=0, description="Group delay window length as a factor of half the shortest period"
    )
    beam_width: int | None = Field(
        default=5, ge=1, description="N-best states kept per candidate (None keeps every state)"
    )
    restart_gap_periods: float = Field(
        default=10.0, gt=0, description="Dynamic programming restarts after candidate gaps of this many mean periods"
    )
    yaga_levels: int = Field(default=3, ge=1, description="Number of wavelet scales in the multiscale product")
    yaga_goi_weight: float = Field(default=0.5, ge=0, description="Weight of the closing/opening discrimination cost")


class MixedPhaseSettings(BaseModel):
    """Complex-cepstrum decomposition of GCI-synchronous frames."""

    window: WindowShape = Field(default=WindowShape.BLACKMAN, description="Frame window shape")
    window_factor: float = Field(default=2.0, gt=0, description="Frame length in local pitch periods")
    fft_factor: int = Field(default=8, ge=1, description="FFT length as a multiple of the frame length")
    cog_threshold_hz: float = Field(
        default=2700.0, gt=0, description="Frames whose anticausal spectral centre of gravity reaches this fail"
    )
    floor_ratio: float = Field(
        default=1e-10, gt=0, lt=1, description="Magnitude floor relative to the spectral peak before taking logs"
    )


class NoiseKind(str, Enum):
    """Additive noise sources."""

    WHITE_GAUSSIAN = "white_gaussian"
    EXTERNAL = "external_noise_file"


class NoiseSpec(BaseModel):
    """Additive noise at a target segmental SNR."""

    kind: NoiseKind = Field(default=NoiseKind.WHITE_GAUSSIAN, description="Noise source")
    snr_db: float = Field(..., allow_inf_nan=False, description="Target mean segmental SNR in dB")
    frame_ms: float = Field(default=32.0, gt=0, description="Frame length for segmental SNR")
    seed: int = Field(default=0, ge=0, description="Random seed")
    noise_file: Path | None = Field(default=None, description="Single-channel WAV file for external noise")

    @model_validator(mode="after")
    def check_noise_file(self) -> NoiseSpec:
        if self.kind == NoiseKind.EXTERNAL and self.noise_file is None:
            raise ValueError("noise_file is required for external_noise_file noise")
        return self


Vector3 = tuple[float, float, float]


class RoomSpec(BaseModel):
    """Shoebox room for source-image reverberation."""

    dimensions_m: Vector3 = Field(default=(3.0, 4.0, 5.0), description="Room size (x, y, z) in meters")
    source_m: Vector3 = Field(default=(1.2, 1.5, 1.6), description="Talker position in meters")
    mic_m: Vector3 = Field(default=(1.8, 2.6, 1.6), description="Microphone position in meters")
    t60_s: float = Field(default=0.3, gt=0, description="Reverberation time in seconds")
    rir_length: int | None = Field(
        default=None, ge=1, description="RIR length in samples (default: decay to -60 dB)"
    )
    max_order: int | None = Field(default=None, ge=0, description="Maximum image order (default: from RIR length)")
    speed_of_sound: float = Field(default=343.0, gt=0, description="Speed of sound in m/s")
    reflection: float | None = Field(
        default=None, ge=0, le=1, description="Override the wall reflection coefficient solved from t60"
    )

    @model_validator(mode="after")
    def check_positions(self) -> RoomSpec:
        for name, pos in (("source_m", self.source_m), ("mic_m", self.mic_m)):
            for coord, size in zip(pos, self.dimensions_m):
                if not 0 < coord < size:
                    raise ValueError(f"{name} {pos} must lie strictly inside the room {self.dimensions_m}")
        return self

    @property
    def source_mic_distance(self) -> float:
        return float(np.linalg.norm(np.subtract(self.source_m, self.mic_m)))


class Condition(BaseModel):
    """One experimental condition: clean, noisy, reverberant or both."""

    name: str = Field(default="clean", description="Condition label used in reports")
    noise: NoiseSpec | None = Field(default=None, description="Additive noise")
    room: RoomSpec | None = Field(default=None, description="Reverberant room")

    @property
    def is_clean(self) -> bool:
        return self.noise is None and self.room is None


class PolarityMode(str, Enum):
    """Polarity handling for input speech."""

    AUTO = "auto"
    POSITIVE = "pos"
    NEGATIVE = "neg"


class DatasetEntry(BaseModel):
    """Speech/EGG recording pair."""

    speech: Path = Field(..., description="Speech WAV path")
    egg: Path = Field(..., description="Contemporaneous EGG WAV path")
    speaker: str = Field(default="default", description="Speaker identifier for pitch priors")
    alignment_samples: int | None = Field(
        default=None, description="Manual speech-vs-EGG delay in samples (skips automatic alignment)"
    )


class DatasetManifest(BaseModel):
    """Collection of recordings to evaluate."""

    entries: list[DatasetEntry] = Field(..., min_length=1, description="Recording pairs")
    speaker_f0_hz: dict[str, float] = Field(
        default_factory=dict, description="Known mean f0 per speaker (estimated from EGG when absent)"
    )
    sample_rate_hz: int = Field(default=16000, gt=0, description="Analysis rate; other rates are resampled")

    def resolved(self, base_dir: Path) -> DatasetManifest:
        """Return a copy with entry paths made absolute against ``base_dir``."""
        entries = [
            entry.model_copy(
                update={
                    "speech": entry.speech if entry.speech.is_absolute() else base_dir / entry.speech,
                    "egg": entry.egg if entry.egg.is_absolute() else base_dir / entry.egg,
                }
            )
            for entry in self.entries
        ]
        return self.model_copy(update={"entries": entries})

    @property
    def speakers(self) -> list[str]:
        return sorted({entry.speaker for entry in self.entries})


DEFAULT_METHODS = ["he", "dypsa", "zfr", "sedreams", "yaga"]


class AcceptanceThresholds(BaseModel):
    """Thresholds that turn a run into a pass/fail check."""

    min_idr_pct: dict[str, float] = Field(default_factory=dict, description="Minimum IDR per method")
    max_ida_ms: dict[str, float] = Field(default_factory=dict, description="Maximum IDA per method")
    max_fast_ratio: float | None = Field(
        default=None, gt=0, description="Maximum RCT ratio of a fast variant over its full method"
    )


class ExperimentConfig(BaseModel):
    """Root configuration for experiment runs."""

    manifest: DatasetManifest = Field(..., description="Dataset manifest")
    methods: list[str] = Field(default_factory=lambda: list(DEFAULT_METHODS), description="Detection methods to run")
    conditions: list[Condition] = Field(
        default_factory=lambda: [Condition()], description="Conditions (clean, noise, reverberation)"
    )
    detector: DetectorSettings = Field(default_factory=DetectorSettings, description="Detector parameters")
    mixedphase: MixedPhaseSettings = Field(
        default_factory=MixedPhaseSettings, description="Mixed-phase decomposition parameters"
    )
    thresholds: AcceptanceThresholds | None = Field(default=None, description="Optional acceptance thresholds")
    polarity: PolarityMode = Field(default=PolarityMode.AUTO, description="Polarity handling")
    seed: int = Field(default=0, ge=0, description="Seed for stochastic degradations")
    workers: int = Field(default=1, ge=1, description="Parallel worker processes (per file)")
    max_lag_ms: float = Field(default=10.0, gt=0, description="Maximum EGG alignment lag in milliseconds")
    histogram_limit_ms: float = Field(default=1.0, gt=0, description="Error histogram half range in ms")
    histogram_bin_ms: float = Field(default=0.05, gt=0, description="Error histogram bin width in ms")

    @field_validator("methods")
    @classmethod
    def check_methods_unique(cls, methods: list[str]) -> list[str]:
        if len(set(methods)) != len(methods):
            raise ValueError("methods must not contain duplicates")
        return methods


class EvalReport(BaseModel):
    """Cycle-based performance measures for one method under one condition."""

    method: str = Field(..., description="Detection method")
    condition: str = Field(default="clean", description="Condition label")
    n_cycles: int = Field(..., ge=0, description="Voiced reference cycles")
    n_identified: int = Field(..., ge=0, description="Cycles with exactly one detection")
    n_missed: int = Field(..., ge=0, description="Cycles with no detection")
    n_false_alarm: int = Field(..., ge=0, description="Cycles with more than one detection")
    idr_pct: float = Field(..., description="Identification rate (%)")
    mr_pct: float = Field(..., description="Miss rate (%)")
    far_pct: float = Field(..., description="False alarm rate (%)")
    ida_ms: float = Field(..., description="Identification accuracy: std of timing errors (ms)")
    acc025_pct: float = Field(..., description="Identified cycles with |error| <= 0.25 ms (%)")
    errors_ms: list[float] = Field(default_factory=list, description="Timing errors of identified cycles (ms)")

    @model_validator(mode="after")
    def check_partition(self) -> EvalReport:
        if self.n_identified + self.n_missed + self.n_false_alarm != self.n_cycles:
            raise ValueError("identified + missed + false alarm must equal the number of cycles")
        if len(self.errors_ms) != self.n_identified:
            raise ValueError("one timing error is expected per identified cycle")
        return self

    @classmethod
    def from_outcomes(
        cls, method: str, condition: str, n_identified: int, n_missed: int, n_false_alarm: int, errors_ms: Any
    ) -> EvalReport:
        """Build a report from raw cycle counts and timing errors."""
        errors = np.asarray(errors_ms, dtype=np.float64).reshape(-1)
        n_cycles = n_identified + n_missed + n_false_alarm
        if n_cycles == 0:
            idr = mr = far = 0.0
        else:
            idr = 100.0 * n_identified / n_cycles
            mr = 100.0 * n_missed / n_cycles
            far = 100.0 * n_false_alarm / n_cycles
        ida = float(np.std(errors)) if errors.size else 0.0
        acc = 100.0 * float(np.count_nonzero(np.abs(errors) <= 0.25 + 1e-12)) / errors.size if errors.size else 0.0
        return cls(
            method=method,
            condition=condition,
            n_cycles=n_cycles,
            n_identified=n_identified,
            n_missed=n_missed,
            n_false_alarm=n_false_alarm,
            idr_pct=idr,
            mr_pct=mr,
            far_pct=far,
            ida_ms=ida,
            acc025_pct=acc,
            errors_ms=[float(e) for e in errors],
        )

    @classmethod
    def pooled(cls, reports: list[EvalReport], method: str | None = None, condition: str | None = None) -> EvalReport:
        """Pool cycles across reports (database-level metrics)."""
        if not reports:
            raise ValueError("Cannot pool an empty list of reports")
        errors = [e for report in reports for e in report.errors_ms]
        return cls.from_outcomes(
            method or reports[0].method,
            condition or reports[0].condition,
            sum(r.n_identified for r in reports),
            sum(r.n_missed for r in reports),
            sum(r.n_false_alarm for r in reports),
            errors,
        )

    def histogram(self, limit_ms: float = 1.0, bin_ms: float = 0.05) -> tuple[FloatArray, np.ndarray]:
        """Timing-error histogram as (bin centers in ms, counts).

        Errors beyond ``limit_ms`` are clipped into the outer bins so counts sum to ``n_identified``.
        """
        n_bins = max(1, int(round(2 * limit_ms / bin_ms)))
        edges = np.linspace(-limit_ms, limit_ms, n_bins + 1)
        clipped = np.clip(np.asarray(self.errors_ms, dtype=np.float64), -limit_ms, limit_ms)
        counts, _ = np.histogram(clipped, bins=edges)
        centers = 0.5 * (edges[:-1] + edges[1:])
        return centers, counts

    def summary_row(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "condition": self.condition,
            "n_cycles": self.n_cycles,
            "IDR": self.idr_pct,
            "MR": self.mr_pct,
            "FAR": self.far_pct,
            "IDA_ms": self.ida_ms,
            "acc025": self.acc025_pct,
        }


class RctReport(BaseModel):
    """Relative computation time of one method."""

    method: str = Field(..., description="Detection method")
    audio_seconds: float = Field(..., gt=0, description="Total audio duration")
    cpu_seconds: float = Field(..., ge=0, description="CPU time spent in detection")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rct_pct(self) -> float:
        return 100.0 * self.cpu_seconds / self.audio_seconds
