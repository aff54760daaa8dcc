"""Dynamic configuration documentation generator from Pydantic models."""

from enum import Enum
from typing import Any, get_args, get_origin

from pydantic import BaseModel
from pydantic_core import PydanticUndefined

from .methods import MethodRegistry
from .models import (
    AcceptanceThresholds,
    Condition,
    CostWeights,
    DatasetEntry,
    DatasetManifest,
    DetectorSettings,
    ExperimentConfig,
    LpcConfig,
    MixedPhaseSettings,
    NoiseSpec,
    RoomSpec,
)


def get_type_string(type_hint: Any) -> str:
    """Convert Python type hint to readable string."""
    origin = get_origin(type_hint)

    if origin is None:
        if hasattr(type_hint, "__name__"):
            return str(type_hint.__name__)
        return str(type_hint)

    args = get_args(type_hint)
    if origin is list:
        return f"list[{get_type_string(args[0])}]" if args else "list"

    if origin is dict:
        if len(args) == 2:
            return f"dict[{get_type_string(args[0])}, {get_type_string(args[1])}]"
        return "dict"

    if origin is tuple:
        return f"tuple[{', '.join(get_type_string(arg) for arg in args)}]" if args else "tuple"

    # Optional[T] is shown as T
    if args and type(None) in args:
        non_none_types = [arg for arg in args if arg is not type(None)]
        if non_none_types:
            return get_type_string(non_none_types[0])

    return str(type_hint)


def extract_field_info(model: type[BaseModel], field_name: str) -> tuple[str, Any, bool, str]:
    """Extract field information from Pydantic model.

    Returns:
        Tuple of (type_string, default_value, is_required, description)
    """
    field_info = model.model_fields[field_name]
    is_required = field_info.is_required()

    default = field_info.default
    if default is ... or default is PydanticUndefined:
        default = None
        if field_info.default_factory is not None:
            try:
                default = field_info.default_factory()  # type: ignore[call-arg]
            except Exception:
                default = None

    return get_type_string(field_info.annotation), default, is_required, field_info.description or ""


def format_default(default: Any) -> str:
    if default is None:
        return "None"
    if isinstance(default, Enum):
        return f'"{default.value}"'
    if isinstance(default, str):
        return f'"{default}"'
    if isinstance(default, BaseModel):
        return type(default).__name__
    if isinstance(default, tuple):
        return str(list(default))
    return str(default)


def format_model_section(model: type[BaseModel], title: str, subtitle: str, prefix: str = "") -> list[str]:
    """One documentation section listing every field of ``model``."""
    output = [f"## {title}", f"   {subtitle}", ""]
    for field_name in model.model_fields:
        type_str, default, is_required, description = extract_field_info(model, field_name)
        required = "Required" if is_required else "Optional"
        output.append(f"  ▸ {prefix}{field_name}")
        if is_required:
            output.append(f"    Type: {type_str} | {required}")
        else:
            output.append(f"    Type: {type_str} | Default: {format_default(default)} | {required}")
        output.append(f"    Description: {description}")
        output.append("")
    output.append("")
    return output


SECTIONS: list[tuple[type[BaseModel], str, str, str]] = [
    (ExperimentConfig, "Root Level Settings", "Options specified at the top level of the configuration file", ""),
    (DatasetManifest, "Manifest Settings (manifest)", "Recordings and speaker pitch", "manifest."),
    (DatasetEntry, "Recording Settings (manifest.entries[])", "One speech/EGG pair", ""),
    (Condition, "Condition Settings (conditions[])", "Clean, noisy or reverberant conditions", ""),
    (NoiseSpec, "Noise Settings (conditions[].noise)", "Additive noise at a segmental SNR", "noise."),
    (RoomSpec, "Room Settings (conditions[].room)", "Source-image reverberation", "room."),
    (DetectorSettings, "Detector Settings (detector)", "Parameters shared by the detection methods", "detector."),
    (LpcConfig, "Linear Prediction Settings (detector.lpc)", "Frame-based LP analysis", "detector.lpc."),
    (CostWeights, "Cost Weights (detector.weights)", "Dynamic programming cost elements", "detector.weights."),
    (MixedPhaseSettings, "Mixed-Phase Settings (mixedphase)", "Complex-cepstrum decomposition", "mixedphase."),
    (AcceptanceThresholds, "Acceptance Thresholds (thresholds)", "Violations exit nonzero", "thresholds."),
]


def format_configuration_docs() -> str:
    """Generate and format configuration documentation dynamically."""
    output: list[str] = []

    output.append("=" * 80)
    output.append("📋 gci-toolkit - Configuration Options")
    output.append("=" * 80)
    output.append("")

    for model, title, subtitle, prefix in SECTIONS:
        output.extend(format_model_section(model, title, subtitle, prefix))

    output.append("## Methods")
    output.append("   Values accepted by 'methods' and --method")
    output.append("")
    for method in MethodRegistry.list_methods():
        output.append(f"  ▸ {method}")
        output.append(f"    Description: {MethodRegistry.get_description(method)}")
        output.append("")

    output.append("=" * 80)
    output.append("💡 Configuration Priority (highest to lowest):")
    output.append("   1. Command-line flags")
    output.append("   2. Manifest entry settings (alignment_samples)")
    output.append("   3. Configuration file")
    output.append("   4. System default values")
    output.append("=" * 80)
    output.append("")

    return "\n".join(output)
