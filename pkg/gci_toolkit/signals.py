"""Numeric domain types shared by every detector.

These are plain frozen dataclasses around numpy arrays. Configuration lives in
``models.py`` (pydantic); anything that carries samples lives here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

MIN_F0_HZ = 50.0
MAX_F0_HZ = 500.0


@dataclass(frozen=True)
class Waveform:
    """Sampled single-channel signal."""

    samples: FloatArray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"Waveform must be one-dimensional, got shape {samples.shape}")
        if samples.size < 1:
            raise ValueError("Waveform must contain at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("Waveform samples must be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"Sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def with_samples(self, samples: ArrayLike) -> Waveform:
        """Return a waveform at the same rate with new samples."""
        return Waveform(np.asarray(samples, dtype=np.float64), self.sample_rate_hz)

    def scaled(self, gain: float) -> Waveform:
        return self.with_samples(self.samples * gain)

    def negated(self) -> Waveform:
        return self.with_samples(-self.samples)


@dataclass(frozen=True)
class PitchPrior:
    """Speaker-level average pitch period, in samples at ``sample_rate_hz``."""

    mean_period_samples: float
    sample_rate_hz: float

    def __post_init__(self) -> None:
        if not self.mean_period_samples > 0 or not self.sample_rate_hz > 0:
            raise ValueError("Pitch period and sample rate must be positive")
        f0 = self.f0_hz
        if not MIN_F0_HZ <= f0 <= MAX_F0_HZ:
            raise ValueError(f"Mean f0 {f0:.1f} Hz outside supported range [{MIN_F0_HZ:.0f}, {MAX_F0_HZ:.0f}] Hz")

    @classmethod
    def from_f0(cls, f0_hz: float, sample_rate_hz: float) -> PitchPrior:
        return cls(mean_period_samples=sample_rate_hz / f0_hz, sample_rate_hz=sample_rate_hz)

    @property
    def f0_hz(self) -> float:
        return self.sample_rate_hz / self.mean_period_samples

    def at_rate(self, sample_rate_hz: float) -> PitchPrior:
        """Express the same f0 at another sampling rate."""
        return PitchPrior.from_f0(self.f0_hz, sample_rate_hz)


@dataclass(frozen=True)
class LpcModel:
    """Prediction-error polynomial A(z) = 1 + a_1 z^-1 + ... + a_p z^-p for one frame."""

    coefficients: FloatArray
    reflection: FloatArray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=np.float64))
        object.__setattr__(self, "reflection", np.asarray(self.reflection, dtype=np.float64))

    @property
    def order(self) -> int:
        return int(self.coefficients.size)

    @property
    def polynomial(self) -> FloatArray:
        return np.concatenate(([1.0], self.coefficients))

    def is_minimum_phase(self) -> bool:
        if self.order == 0:
            return True
        return bool(np.all(np.abs(np.roots(self.polynomial)) < 1.0))


@dataclass(frozen=True)
class GciSequence:
    """Strictly increasing GCI instants, as fractional sample indices."""

    instants: FloatArray
    sample_rate_hz: float
    source: str = "unknown"

    def __post_init__(self) -> None:
        instants = np.asarray(self.instants, dtype=np.float64).reshape(-1)
        if instants.size > 1 and not np.all(np.diff(instants) > 0):
            raise ValueError(f"GCI instants from '{self.source}' must be strictly increasing")
        if not np.all(np.isfinite(instants)):
            raise ValueError("GCI instants must be finite")
        object.__setattr__(self, "instants", instants)

    @classmethod
    def empty(cls, sample_rate_hz: float, source: str = "unknown") -> GciSequence:
        return cls(np.zeros(0), sample_rate_hz, source)

    def __len__(self) -> int:
        return int(self.instants.size)

    @property
    def times_s(self) -> FloatArray:
        return self.instants / self.sample_rate_hz

    def rounded(self) -> IntArray:
        """Nearest-sample positions; detectors only round at this final stage."""
        return np.rint(self.instants).astype(np.int64)

    def shifted(self, offset_samples: float) -> GciSequence:
        return GciSequence(self.instants + offset_samples, self.sample_rate_hz, self.source)

    def within(self, num_samples: int) -> GciSequence:
        """Drop instants outside [0, num_samples)."""
        keep = (self.instants >= 0) & (self.instants < num_samples)
        return GciSequence(self.instants[keep], self.sample_rate_hz, self.source)

    def relabeled(self, source: str) -> GciSequence:
        return GciSequence(self.instants, self.sample_rate_hz, source)


def strictly_increasing(instants: ArrayLike) -> FloatArray:
    """Sort and drop exact duplicates so the result satisfies GciSequence."""
    values = np.unique(np.asarray(instants, dtype=np.float64))
    return values[np.isfinite(values)]
