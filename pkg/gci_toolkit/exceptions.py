"""Exception hierarchy for GCI detection and evaluation."""


class GciToolkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(GciToolkitError, ValueError):
    """Raised when an analysis configuration is invalid (e.g. LPC order >= frame length)."""


class SignalTooShortError(GciToolkitError, ValueError):
    """Raised when a waveform is too short for the requested analysis."""


class UnstableFilterError(GciToolkitError, ArithmeticError):
    """Raised when a recursive filter diverges to non-finite values."""


class AlignmentError(GciToolkitError):
    """Raised when speech/EGG alignment has no confident correlation peak."""


class EvaluationError(GciToolkitError, ValueError):
    """Raised when an evaluation cannot be computed (empty reference, no usable frames)."""


class DegradationError(GciToolkitError, ValueError):
    """Raised when a degradation cannot be applied (zero-energy input, infeasible room)."""
