"""Tests for the configuration documentation generator."""

from typing import Optional

from gci_toolkit.config_docs import (
    extract_field_info,
    format_configuration_docs,
    format_default,
    format_model_section,
    get_type_string,
)
from gci_toolkit.methods import MethodRegistry
from gci_toolkit.models import DEFAULT_METHODS, ExperimentConfig, LpcConfig, NoiseSpec, PolarityMode


class TestTypeStrings:
    """Test readable type strings."""

    def test_plain_types(self) -> None:
        """Test builtin and enum types."""
        assert get_type_string(int) == "int"
        assert get_type_string(PolarityMode) == "PolarityMode"

    def test_generic_types(self) -> None:
        """Test lists, dicts and tuples."""
        assert get_type_string(list[str]) == "list[str]"
        assert get_type_string(dict[str, float]) == "dict[str, float]"
        assert get_type_string(tuple[float, float, float]) == "tuple[float, float, float]"

    def test_optional_shows_inner_type(self) -> None:
        """Test that optional types are shown without None."""
        assert get_type_string(Optional[int]) == "int"  # noqa: UP007
        assert get_type_string(float | None) == "float"


class TestFieldInfo:
    """Test field extraction and default formatting."""

    def test_required_field(self) -> None:
        """Test a field without a default."""
        type_str, default, is_required, description = extract_field_info(NoiseSpec, "snr_db")
        assert (type_str, default, is_required) == ("float", None, True)
        assert "SNR" in description

    def test_default_factory(self) -> None:
        """Test that default factories are evaluated."""
        _, default, is_required, _ = extract_field_info(ExperimentConfig, "methods")
        assert default == DEFAULT_METHODS
        assert is_required is False

    def test_format_default(self) -> None:
        """Test formatting of enum, string, tuple and model defaults."""
        assert format_default(None) == "None"
        assert format_default(PolarityMode.AUTO) == '"auto"'
        assert format_default("hann") == '"hann"'
        assert format_default((1.0, 2.0)) == "[1.0, 2.0]"
        assert format_default(LpcConfig()) == "LpcConfig"
        assert format_default(0.35) == "0.35"


class TestDocumentation:
    """Test the generated documentation."""

    def test_model_section(self) -> None:
        """Test that every field is listed with the prefix."""
        lines = format_model_section(NoiseSpec, "Noise", "Additive noise", "noise.")
        assert lines[0] == "## Noise"
        for field_name in NoiseSpec.model_fields:
            assert f"  ▸ noise.{field_name}" in lines
        assert "    Type: float | Required" in lines

    def test_full_documentation(self) -> None:
        """Test that the listing covers every method and the priority notes."""
        docs = format_configuration_docs()
        assert docs.startswith("=" * 80)
        for method in MethodRegistry.list_methods():
            assert f"  ▸ {method}" in docs
        assert "## Detector Settings (detector)" in docs
        assert "Configuration Priority" in docs
