"""Configuration validator for experiment runs."""

from pathlib import Path

import click
import yaml
from pydantic import ValidationError

from .degradations import reflection_for_t60
from .exceptions import DegradationError
from .methods import MethodRegistry
from .models import ExperimentConfig, NoiseKind
from .signals import MAX_F0_HZ, MIN_F0_HZ


class ConfigValidator:
    """Validates and provides warnings for configuration files."""

    def __init__(self, verbose: bool = False):
        """Initialize validator with verbosity setting."""
        self.verbose = verbose
        self.warnings: list[str] = []
        self.errors: list[str] = []

    def validate_config_file(self, config_path: str) -> tuple[bool, ExperimentConfig | None]:
        """
        Validate configuration file and return validation result.

        Manifest paths in the returned config are resolved against the config directory.

        Returns:
            tuple of (is_valid, config object or None)
        """
        self.warnings = []
        self.errors = []

        config_file = Path(config_path)
        if not config_file.exists():
            self.errors.append(f"Configuration file not found: {config_path}")
            self._print_validation_results()
            return False, None

        try:
            with open(config_file, encoding="utf-8") as f:
                config_data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            self.errors.append(f"YAML parsing error: {e}")
            self._print_validation_results()
            return False, None
        except Exception as e:
            self.errors.append(f"Failed to read configuration file: {e}")
            self._print_validation_results()
            return False, None

        if not isinstance(config_data, dict):
            self.errors.append("Configuration must be a mapping at the top level")
            self._print_validation_results()
            return False, None

        try:
            config = ExperimentConfig(**config_data)
        except ValidationError as e:
            for error in e.errors():
                location = " -> ".join(str(loc) for loc in error["loc"])
                self.errors.append(f"{location}: {error['msg']}")
            self._print_validation_results()
            return False, None
        except Exception as e:
            self.errors.append(f"Configuration validation failed: {e}")
            self._print_validation_results()
            return False, None

        config = self._resolve_paths(config, config_file.parent)
        self._validate_methods(config)
        self._validate_manifest(config)
        self._validate_conditions(config)
        self._validate_thresholds(config)

        self._print_validation_results()

        return len(self.errors) == 0, config if len(self.errors) == 0 else None

    @staticmethod
    def _resolve_paths(config: ExperimentConfig, config_dir: Path) -> ExperimentConfig:
        conditions = []
        for condition in config.conditions:
            noise = condition.noise
            if noise is not None and noise.noise_file is not None and not noise.noise_file.is_absolute():
                noise = noise.model_copy(update={"noise_file": config_dir / noise.noise_file})
            conditions.append(condition.model_copy(update={"noise": noise}))
        return config.model_copy(update={"manifest": config.manifest.resolved(config_dir), "conditions": conditions})

    def _validate_methods(self, config: ExperimentConfig) -> None:
        for method in config.methods:
            if not MethodRegistry.is_valid(method):
                self.errors.append(f"Invalid method '{method}'. Available methods: {MethodRegistry.list_methods()}")

    def _validate_manifest(self, config: ExperimentConfig) -> None:
        """Check that recordings exist and speaker priors are usable."""
        seen: dict[Path, int] = {}
        for i, entry in enumerate(config.manifest.entries, 1):
            for kind, path in (("speech", entry.speech), ("egg", entry.egg)):
                if not path.exists():
                    self.errors.append(f"Entry {i}: {kind} file not found: {path}")
            if entry.speech in seen:
                self.warnings.append(f"Entry {i}: Duplicate speech file (also entry {seen[entry.speech]})")
            else:
                seen[entry.speech] = i

        speakers = set(config.manifest.speakers)
        for speaker, f0 in config.manifest.speaker_f0_hz.items():
            if speaker not in speakers:
                self.warnings.append(f"speaker_f0_hz: Speaker '{speaker}' has no entries")
            if not MIN_F0_HZ <= f0 <= MAX_F0_HZ:
                self.errors.append(
                    f"speaker_f0_hz -> {speaker}: {f0} Hz outside [{MIN_F0_HZ:.0f}, {MAX_F0_HZ:.0f}] Hz"
                )

    def _validate_conditions(self, config: ExperimentConfig) -> None:
        names: set[str] = set()
        for i, condition in enumerate(config.conditions, 1):
            if condition.name in names:
                self.errors.append(f"Condition {i}: Duplicate name '{condition.name}'")
            names.add(condition.name)
            noise = condition.noise
            if noise is not None and noise.kind == NoiseKind.EXTERNAL and noise.noise_file is not None:
                if not noise.noise_file.exists():
                    self.errors.append(f"Condition {i}: Noise file not found: {noise.noise_file}")
            if condition.room is not None:
                try:
                    reflection_for_t60(condition.room)
                except DegradationError as e:
                    self.errors.append(f"Condition {i}: {e}")
            if condition.is_clean and condition.name != "clean":
                self.warnings.append(f"Condition {i}: '{condition.name}' has neither noise nor room")

    def _validate_thresholds(self, config: ExperimentConfig) -> None:
        if config.thresholds is None:
            return
        configured = set(config.methods)
        for key in ("min_idr_pct", "max_ida_ms"):
            for method in getattr(config.thresholds, key):
                if method not in configured:
                    self.warnings.append(f"thresholds -> {key}: Method '{method}' is not run")
        if config.thresholds.max_fast_ratio is not None:
            pairs = [m for m in configured if MethodRegistry.full_method(m) in configured]
            if not pairs:
                self.warnings.append("thresholds -> max_fast_ratio: No fast variant is run with its full method")

    def _print_validation_results(self) -> None:
        """Print validation errors and warnings."""
        if self.errors:
            click.echo("\n❌ Validation Errors:", err=True)
            for error in self.errors:
                click.echo(f"   • {error}", err=True)

        if self.warnings:
            click.echo("\n⚠️  Warnings:")
            for warning in self.warnings:
                click.echo(f"   • {warning}")

        if self.errors:
            click.echo("\n❌ Configuration validation failed", err=True)
        elif self.warnings:
            click.echo("\n✅ Configuration is valid (with warnings)")
        elif self.verbose:
            click.echo("\n✅ Configuration is valid")
