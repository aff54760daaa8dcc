"""Runs detection, evaluation and degradation commands with consistent error reporting."""

from __future__ import annotations

import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import click
import numpy as np
import yaml

from .benchmark import bench_rct, fast_ratios, relative_ordering
from .config_docs import format_configuration_docs
from .config_manager import noise_sweep, reverb_sweep, speech_f0
from .degradations import apply_condition
from .experiment import ExperimentResult, load_speech, rct_table, run_experiment, threshold_violations
from .file_manager import FileManager, load_waveform, save_waveform
from .methods import MethodRegistry, run_method
from .mixedphase import summarize, window_length_sweep
from .models import (
    Condition,
    DetectorSettings,
    ExperimentConfig,
    MixedPhaseSettings,
    NoiseKind,
    NoiseSpec,
    PolarityMode,
    RoomSpec,
)
from .plots import plot_cog_histogram, plot_error_histogram, plot_position_histogram, plot_sweep
from .polarity import ensure_polarity
from .signals import PitchPrior
from .synthetic import DEFAULT_SUITE_F0_HZ, synthetic_suite
from .ui_reporter import ConsoleReporter
from .validator import ConfigValidator

logger = logging.getLogger(__name__)


class ColoredWarningFormatter(logging.Formatter):
    """Custom formatter to make warning messages more prominent."""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self.use_colors = (
            hasattr(sys.stderr, "isatty")
            and sys.stderr.isatty()
            and not os.environ.get("NO_COLOR")
            and os.environ.get("TERM", "") != "dumb"
        )

    def format(self, record: logging.LogRecord) -> str:
        if record.levelno == logging.WARNING:
            msg = record.getMessage()
            if "⚠️" not in msg:
                record.msg = f"⚠️  {record.msg}"
            if self.use_colors:
                record.msg = f"\033[1;33m{record.msg}\033[0m"
        return super().format(record)


class CliRunner:
    """Handles CLI execution logic."""

    def __init__(self, verbose: bool = False):
        """Initialize CLI runner."""
        self.verbose = verbose
        self._setup_logging()

    def _setup_logging(self) -> None:
        """Configure logging based on verbosity."""
        logger_root = logging.getLogger()
        for handler in logger_root.handlers[:]:
            logger_root.removeHandler(handler)

        console_handler = logging.StreamHandler(sys.stderr)

        if self.verbose:
            console_handler.setLevel(logging.DEBUG)
            formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        else:
            console_handler.setLevel(logging.WARNING)
            formatter = ColoredWarningFormatter("%(message)s")

        console_handler.setFormatter(formatter)

        logger_root.setLevel(logging.DEBUG if self.verbose else logging.WARNING)
        logger_root.addHandler(console_handler)

    def show_options(self) -> None:
        """Display available configuration options."""
        click.echo(format_configuration_docs())

    def validate_config(self, config_path: Path) -> tuple[bool, ExperimentConfig | None]:
        """Validate configuration file."""
        validator = ConfigValidator(verbose=self.verbose)
        return validator.validate_config_file(str(config_path))

    def _load_optional_config(self, config_path: Path | None) -> ExperimentConfig | None:
        if config_path is None:
            return None
        is_valid, config = self.validate_config(config_path)
        if not is_valid or config is None:
            raise click.ClickException(f"Invalid configuration: {config_path}")
        return config

    def detect(
        self,
        input_path: Path,
        output_path: Path,
        method: str,
        f0_mean: float | None = None,
        polarity: PolarityMode = PolarityMode.AUTO,
        config_path: Path | None = None,
    ) -> int:
        """Detect GCIs in one file and write them as text or CSV.

        Returns:
            Exit code (0 for success, 1 for failure)
        """
        try:
            config = self._load_optional_config(config_path)
            settings = config.detector if config else DetectorSettings()
            speech = load_waveform(input_path)
            speech, flipped = ensure_polarity(speech, polarity, settings.lpc)
            f0 = f0_mean if f0_mean is not None else speech_f0(speech, settings.lpc)
            prior = PitchPrior.from_f0(f0, speech.sample_rate_hz)
            gcis = run_method(method, speech, prior, settings)
            FileManager.write_gcis(output_path, gcis)

            click.echo(f"\n📋 Input: {input_path.name} ({speech.duration_s:.2f} s, {speech.sample_rate_hz:.0f} Hz)")
            click.echo(f"🎙  Method: {method} | mean f0 {f0:.1f} Hz | polarity {'flipped' if flipped else 'kept'}")
            click.echo(f"✅ Detected {len(gcis)} GCIs")
            click.echo(f"📁 Output: {output_path}")
            return 0

        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            click.echo(f"❌ Error: {e}", err=True)
            return 1

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1

    def evaluate(
        self,
        config_path: Path,
        output_dir: Path,
        methods: Sequence[str] | None = None,
        conditions: Sequence[str] | None = None,
        delay_ms: float | None = None,
        workers: int | None = None,
        plots: bool = False,
        validate_only: bool = False,
        snrs_db: Sequence[float] = (),
        t60s_s: Sequence[float] = (),
        noise_kind: NoiseKind = NoiseKind.WHITE_GAUSSIAN,
        noise_file: Path | None = None,
    ) -> int:
        """Run an experiment and write its reports.

        SNR or T60 values replace the configured conditions with a clean condition followed by
        one noisy condition per SNR and one reverberant condition per T60.

        Returns:
            Exit code (0 for success, 1 for failure or a violated threshold)
        """
        is_valid, config = self.validate_config(config_path)
        if not is_valid or config is None:
            return 1

        if validate_only:
            click.echo("\n✅ Configuration is valid!")
            return 0

        if workers is not None:
            config = config.model_copy(update={"workers": workers})
        if snrs_db or t60s_s:
            try:
                sweep = noise_sweep(snrs_db, noise_kind, noise_file) + reverb_sweep(t60s_s)
            except ValueError as e:
                click.echo(f"❌ Error: {e}", err=True)
                return 1
            config = config.model_copy(update={"conditions": sweep})
        delay_samples = None
        if delay_ms is not None:
            delay_samples = int(round(delay_ms * config.manifest.sample_rate_hz / 1000.0))

        click.echo(f"\n📋 Configuration: {config_path.name}")
        click.echo(f"🎙  Recordings: {len(config.manifest.entries)}")
        click.echo(f"🔧 Methods: {', '.join(methods or config.methods)}")
        click.echo(f"🌫  Conditions: {', '.join(conditions or [c.name for c in config.conditions])}")
        click.echo()

        try:
            result = run_experiment(
                config, methods, conditions, delay_samples, reporter=ConsoleReporter(verbose=self.verbose)
            )
            file_manager = FileManager(output_dir)
            self._write_experiment(result, config, file_manager, plots)
            self._display_reports(result, output_dir)

            violations = threshold_violations(config.thresholds, result.reports) if config.thresholds else []
            return self._report_violations(violations)

        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            click.echo(f"❌ Error: {e}", err=True)
            return 1

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1

    def _write_experiment(
        self, result: ExperimentResult, config: ExperimentConfig, file_manager: FileManager, plots: bool
    ) -> None:
        reports = result.reports
        file_manager.write_summary(reports)
        file_manager.write_rows(
            file_manager.create_output_path("sweep.csv"), ["condition", *result.methods], result.sweep_table()
        )
        file_manager.write_jsonl(file_manager.create_output_path("utterances.jsonl"), result.records())
        for report in reports:
            file_manager.write_histogram(report, config.histogram_limit_ms, config.histogram_bin_ms)
        for speaker, counts in result.position_histograms().items():
            edges = np.linspace(0.0, 1.0, counts.size + 1)
            centers = 0.5 * (edges[:-1] + edges[1:])
            rows = ({"bin_center": float(b), "count": int(c)} for b, c in zip(centers, counts))
            file_manager.write_rows(
                file_manager.create_output_path(f"{speaker}.csv", "positions"), ["bin_center", "count"], rows
            )
            if plots:
                plot_position_histogram(counts, file_manager.create_output_path(f"{speaker}.png", "positions"), speaker)

        if not plots:
            return
        for report in reports:
            path = file_manager.create_output_path(f"{report.method}_{report.condition}.png", "histograms")
            plot_error_histogram(report, path, config.histogram_limit_ms, config.histogram_bin_ms)
        conditions = {c.name: c for c in config.conditions}
        for axis, xlabel in (("snr", "SNR (dB)"), ("t60", "T60 (ms)")):
            series = sweep_series(result, conditions, axis)
            if any(len(points) > 1 for points in series.values()):
                plot_sweep(series, file_manager.create_output_path(f"sweep_{axis}.png"), xlabel)

    def _display_reports(self, result: ExperimentResult, output_dir: Path) -> None:
        click.echo()
        click.echo(f"{'method':<15}{'condition':<25}{'cycles':>8}{'IDR':>9}{'MR':>8}{'FAR':>8}{'IDA ms':>9}")
        for report in result.reports:
            click.echo(
                f"{report.method:<15}{report.condition:<25}{report.n_cycles:>8}{report.idr_pct:>9.2f}"
                f"{report.mr_pct:>8.2f}{report.far_pct:>8.2f}{report.ida_ms:>9.3f}"
            )
        if result.failures:
            click.echo(f"\n⚠️  Skipped {len(result.failures)} recordings:")
            for name, error in result.failures:
                click.echo(f"   • {name}: {error}")
        click.echo(f"\n📁 Output: {output_dir}/")

    @staticmethod
    def _report_violations(violations: list[str]) -> int:
        if violations:
            click.echo("\n❌ Acceptance thresholds violated:", err=True)
            for violation in violations:
                click.echo(f"   • {violation}", err=True)
            return 1
        click.echo("\n✅ Done")
        return 0

    def degrade(
        self,
        input_path: Path,
        output_path: Path,
        snr_db: float | None = None,
        noise_kind: NoiseKind = NoiseKind.WHITE_GAUSSIAN,
        noise_file: Path | None = None,
        t60_s: float | None = None,
        seed: int = 0,
    ) -> int:
        """Reverberate and/or add noise to one file.

        Returns:
            Exit code (0 for success, 1 for failure)
        """
        try:
            if snr_db is None and t60_s is None:
                click.echo("❌ Error: give --snr and/or --t60", err=True)
                return 1
            noise = None
            if snr_db is not None:
                noise = NoiseSpec(kind=noise_kind, snr_db=snr_db, seed=seed, noise_file=noise_file)
            room = RoomSpec(t60_s=t60_s) if t60_s is not None else None
            speech = load_waveform(input_path)
            degraded = apply_condition(speech, Condition(name="degraded", noise=noise, room=room))
            save_waveform(output_path, degraded)
            click.echo(f"✅ Wrote {output_path} ({degraded.duration_s:.2f} s)")
            return 0

        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            click.echo(f"❌ Error: {e}", err=True)
            return 1

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1

    def bench(
        self,
        output_dir: Path,
        config_path: Path | None = None,
        methods: Sequence[str] | None = None,
        repetitions: int = 3,
        synthetic_seconds: float = 60.0,
        seed: int = 0,
    ) -> int:
        """Measure the relative computation time of each method.

        Without a configuration the synthetic suite is timed.

        Returns:
            Exit code (0 for success, 1 for failure or a violated ratio)
        """
        try:
            config = self._load_optional_config(config_path)
            if config is not None:
                recordings = load_speech(config)
                settings = config.detector
                selected = list(methods or config.methods)
            else:
                suite = synthetic_suite(total_s=synthetic_seconds, seed=seed)
                recordings = [(u.speech, u.prior) for u in suite]
                settings = DetectorSettings()
                selected = list(methods or MethodRegistry.list_methods())

            click.echo(f"\n📋 Timing {len(selected)} methods on {len(recordings)} recordings ({repetitions} runs)")
            reports = bench_rct(selected, recordings, repetitions, settings)
            ratios = fast_ratios(reports)

            file_manager = FileManager(output_dir)
            file_manager.write_rows(
                file_manager.create_output_path("rct.csv"),
                ["method", "rct_pct", "cpu_s", "audio_s"],
                rct_table(reports),
            )
            click.echo()
            for report in reports:
                click.echo(f"  {report.method:<15} RCT {report.rct_pct:8.3f} %")
            click.echo(f"\n🏁 Fastest to slowest: {' < '.join(relative_ordering(reports))}")
            for method, ratio in ratios.items():
                click.echo(f"⚡ {method} / {MethodRegistry.full_method(method)}: {ratio:.3f}")
            click.echo(f"📁 Output: {output_dir}/")

            if config is not None and config.thresholds is not None:
                return self._report_violations(threshold_violations(config.thresholds, rct_ratios=ratios))
            return 0

        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            click.echo(f"❌ Error: {e}", err=True)
            return 1

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1

    def decompose(
        self,
        input_path: Path,
        output_dir: Path,
        gci_path: Path | None = None,
        method: str = "sedreams",
        f0_mean: float | None = None,
        settings: MixedPhaseSettings | None = None,
        sweep_factors: Sequence[float] = (),
        plots: bool = False,
    ) -> int:
        """Mixed-phase failure rate on GCI-synchronous frames of one file.

        GCIs are read from ``gci_path`` when given, otherwise detected with ``method``.

        Returns:
            Exit code (0 for success, 1 for failure)
        """
        try:
            settings = settings or MixedPhaseSettings()
            speech = load_waveform(input_path)
            speech, _ = ensure_polarity(speech)
            f0 = f0_mean if f0_mean is not None else speech_f0(speech)
            prior = PitchPrior.from_f0(f0, speech.sample_rate_hz)
            if gci_path is not None:
                gcis = FileManager.read_gcis(gci_path, speech.sample_rate_hz)
            else:
                gcis = run_method(method, speech, prior)

            summary = summarize(speech, gcis, settings, prior)
            file_manager = FileManager(output_dir)
            rows = ({"frame": i, "cog_hz": float(c)} for i, c in enumerate(summary.cog_hz))
            file_manager.write_rows(file_manager.create_output_path("cog.csv"), ["frame", "cog_hz"], rows)
            if plots:
                cog_plot = file_manager.create_output_path("cog.png")
                plot_cog_histogram(summary.cog_hz, settings.cog_threshold_hz, cog_plot)

            click.echo(f"\n📋 Input: {input_path.name} | {len(gcis)} GCIs | {summary.n_frames} frames")
            threshold = settings.cog_threshold_hz
            click.echo(f"🔬 Failure rate: {summary.failure_rate_pct:.2f}% (threshold {threshold:.0f} Hz)")
            if summary.n_skipped:
                click.echo(f"⚠️  Skipped {summary.n_skipped} frames at the edges")
            if sweep_factors:
                sweep = window_length_sweep(speech, gcis, sweep_factors, settings, prior)
                file_manager.write_rows(
                    file_manager.create_output_path("window_sweep.csv"),
                    ["window_factor", "failure_rate_pct"],
                    ({"window_factor": k, "failure_rate_pct": v} for k, v in sweep.items()),
                )
                for factor, rate in sweep.items():
                    click.echo(f"   {factor:4.2f} periods: {rate:6.2f}%")
            click.echo(f"📁 Output: {output_dir}/")
            return 0

        except FileNotFoundError as e:
            logger.error(f"File not found: {e}")
            click.echo(f"❌ Error: {e}", err=True)
            return 1

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1

    def synthesize(
        self,
        output_dir: Path,
        total_s: float = 60.0,
        utterance_s: float = 2.0,
        f0s_hz: Sequence[float] = DEFAULT_SUITE_F0_HZ,
        seed: int = 0,
        larynx_delay_samples: int = 0,
    ) -> int:
        """Write a synthetic speech/EGG suite with ground-truth epochs and a runnable config.

        Returns:
            Exit code (0 for success, 1 for failure)
        """
        try:
            suite = synthetic_suite(
                total_s, utterance_s, f0s_hz=tuple(f0s_hz), seed=seed, larynx_delay_samples=larynx_delay_samples
            )
            file_manager = FileManager(output_dir)
            entries: list[dict[str, Any]] = []
            speaker_f0: dict[str, float] = {}
            for utterance in suite:
                speaker = f"f{int(round(utterance.f0_hz))}"
                speaker_f0[speaker] = utterance.f0_hz
                speech_path = file_manager.create_output_path(f"{utterance.name}.wav", "speech")
                egg_path = file_manager.create_output_path(f"{utterance.name}.wav", "egg")
                save_waveform(speech_path, utterance.speech)
                save_waveform(egg_path, utterance.egg)
                epochs_path = file_manager.create_output_path(f"{utterance.name}.csv", "epochs")
                FileManager.write_gcis(epochs_path, utterance.gcis)
                entries.append(
                    {
                        "speech": str(speech_path.relative_to(output_dir)),
                        "egg": str(egg_path.relative_to(output_dir)),
                        "speaker": speaker,
                    }
                )
            sample_rate = int(round(suite[0].speech.sample_rate_hz))
            document = {
                "manifest": {"entries": entries, "speaker_f0_hz": speaker_f0, "sample_rate_hz": sample_rate},
                "seed": seed,
            }
            config_file = file_manager.create_output_path("config.yml")
            with open(config_file, "w", encoding="utf-8") as f:
                yaml.safe_dump(document, f, sort_keys=False)

            click.echo(f"✅ Wrote {len(suite)} utterances ({sum(u.speech.duration_s for u in suite):.1f} s)")
            click.echo(f"📁 Output: {output_dir}/ (run: gcitool evaluate -c {config_file})")
            return 0

        except Exception as e:
            logger.error(f"Unexpected error: {e}", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            return 1


def sweep_series(
    result: ExperimentResult, conditions: dict[str, Condition], axis: str
) -> dict[str, list[tuple[float, float]]]:
    """IDR per method against SNR (noise-only conditions) or T60 in ms (room-only conditions)."""
    series: dict[str, list[tuple[float, float]]] = {m: [] for m in result.methods}
    for name in result.conditions:
        condition = conditions.get(name)
        if condition is None:
            continue
        if axis == "snr" and condition.noise is not None and condition.room is None:
            x = condition.noise.snr_db
        elif axis == "t60" and condition.room is not None and condition.noise is None:
            x = 1000.0 * condition.room.t60_s
        else:
            continue
        for method in result.methods:
            report = result.report(method, name)
            if report is not None:
                series[method].append((x, report.idr_pct))
    return series
