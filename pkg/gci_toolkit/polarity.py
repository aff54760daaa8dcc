"""Speech polarity check on the skewness of the LP residual."""

from __future__ import annotations

import logging

from scipy.stats import skew

from .dsp import lp_residual
from .models import LpcConfig, PolarityMode
from .signals import Waveform

logger = logging.getLogger(__name__)

MIN_SKEWNESS = 0.1


def residual_skewness(x: Waveform, lpc: LpcConfig | None = None) -> float:
    """Skewness of the LP residual; positive for positive-going excitation peaks."""
    return float(skew(lp_residual(x, lpc).samples))


def ensure_polarity(
    x: Waveform,
    mode: PolarityMode = PolarityMode.AUTO,
    lpc: LpcConfig | None = None,
    min_skewness: float = MIN_SKEWNESS,
) -> tuple[Waveform, bool]:
    """Return the speech with positive polarity and whether it was negated.

    ``pos`` keeps the input, ``neg`` always negates it, and ``auto`` negates when the
    residual skewness is clearly negative. A skewness within ``min_skewness`` of zero
    leaves the input unchanged with a warning.
    """
    if mode == PolarityMode.POSITIVE:
        return x, False
    if mode == PolarityMode.NEGATIVE:
        return x.negated(), True

    skewness = residual_skewness(x, lpc)
    if abs(skewness) < min_skewness:
        logger.warning(f"Residual skewness {skewness:.3f} is too weak to decide polarity; keeping input")
        return x, False
    if skewness < 0:
        logger.debug(f"Negating speech (residual skewness {skewness:.3f})")
        return x.negated(), True
    return x, False
