"""Registry of GCI detection methods."""

from collections.abc import Callable
from enum import Enum
from typing import Any

from .dypsa import detect_dypsa
from .he import detect_he, detect_he_fast
from .models import DetectorSettings
from .sedreams import detect_sedreams, detect_sedreams_fast
from .signals import GciSequence, PitchPrior, Waveform
from .yaga import detect_yaga
from .zfr import detect_zfr

Detector = Callable[[Waveform, PitchPrior, DetectorSettings], GciSequence]


class MethodName(str, Enum):
    """Available detection methods."""

    HE = "he"
    FAST_HE = "fast_he"
    DYPSA = "dypsa"
    ZFR = "zfr"
    SEDREAMS = "sedreams"
    FAST_SEDREAMS = "fast_sedreams"
    YAGA = "yaga"


class MethodRegistry:
    """Manages the built-in detection methods."""

    METHODS: dict[str, dict[str, Any]] = {
        MethodName.HE: {
            "detector": detect_he,
            "description": "Negative-going zero crossings of the centre of gravity of the residual Hilbert envelope",
        },
        MethodName.FAST_HE: {
            "detector": detect_he_fast,
            "description": "Hilbert envelope method evaluated on a coarse grid and refined by bisection",
        },
        MethodName.DYPSA: {
            "detector": detect_dypsa,
            "description": "Group delay candidates with phase-slope projection, selected by dynamic programming",
        },
        MethodName.ZFR: {
            "detector": detect_zfr,
            "description": "Positive-going zero crossings of the zero-frequency resonator output",
        },
        MethodName.SEDREAMS: {
            "detector": detect_sedreams,
            "description": "Residual peaks inside intervals of presence derived from the mean-based signal",
        },
        MethodName.FAST_SEDREAMS: {
            "detector": detect_sedreams_fast,
            "description": "SEDREAMS with the mean-based signal minima found coarse to fine",
        },
        MethodName.YAGA: {
            "detector": detect_yaga,
            "description": "Group delay candidates of the wavelet multiscale product, with a closure cost",
        },
    }

    # Fast variants and the method they accelerate.
    FAST_VARIANTS: dict[str, str] = {
        MethodName.FAST_HE: MethodName.HE,
        MethodName.FAST_SEDREAMS: MethodName.SEDREAMS,
    }

    @classmethod
    def get(cls, method: str) -> Detector:
        """Get the detector for a method."""
        if method not in cls.METHODS:
            raise ValueError(f"Unknown method: {method}. Available methods: {cls.list_methods()}")
        detector: Detector = cls.METHODS[method]["detector"]
        return detector

    @classmethod
    def get_description(cls, method: str) -> str:
        if method not in cls.METHODS:
            raise ValueError(f"Unknown method: {method}. Available methods: {cls.list_methods()}")
        return str(cls.METHODS[method]["description"])

    @classmethod
    def is_valid(cls, method: str) -> bool:
        """Check if a method name is valid."""
        return method in cls.METHODS

    @classmethod
    def list_methods(cls) -> list[str]:
        """List all available method names."""
        return [str(MethodName(name).value) for name in cls.METHODS]

    @classmethod
    def full_method(cls, method: str) -> str | None:
        """Method a fast variant accelerates, or None."""
        full = cls.FAST_VARIANTS.get(method)
        return None if full is None else str(MethodName(full).value)


def run_method(method: str, x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """Run one registered detector and label its output with the method name."""
    gcis = MethodRegistry.get(method)(x, prior, settings or DetectorSettings())
    return gcis.relabeled(str(MethodName(method).value))
