"""Experiment orchestration: load, fix polarity, degrade, detect and evaluate every recording."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .config_manager import ConfigManager
from .degradations import apply_condition
from .evaluation import ReferenceCycles, align_egg, build_cycles, differenced_egg, evaluate, reference_gcis
from .exceptions import ConfigurationError
from .file_manager import load_waveform
from .methods import MethodName, run_method
from .models import AcceptanceThresholds, Condition, DatasetEntry, EvalReport, ExperimentConfig, RctReport
from .polarity import ensure_polarity
from .sedreams import gci_position_distribution
from .signals import FloatArray, PitchPrior, Waveform
from .ui_reporter import SilentReporter, UIReporter

logger = logging.getLogger(__name__)

POSITION_BINS = 20
_POSITION_METHODS = {MethodName.SEDREAMS.value, MethodName.FAST_SEDREAMS.value}


@dataclass(frozen=True)
class PreparedRecording:
    """Polarity-corrected speech with its reference cycles expressed in speech time."""

    name: str
    speaker: str
    speech: Waveform
    cycles: ReferenceCycles
    prior: PitchPrior
    flipped: bool
    delay_samples: int


@dataclass(frozen=True)
class UtteranceResult:
    """Evaluation of one method on one recording under one condition."""

    name: str
    speaker: str
    report: EvalReport
    n_detected: int
    flipped: bool
    delay_samples: int
    positions: tuple[int, ...] = ()

    def to_record(self) -> dict[str, Any]:
        return {
            "recording": self.name,
            "speaker": self.speaker,
            **self.report.summary_row(),
            "n_detected": self.n_detected,
            "flipped": self.flipped,
            "delay_samples": self.delay_samples,
        }


@dataclass(frozen=True)
class RecordingOutcome:
    name: str
    results: list[UtteranceResult] = field(default_factory=list)
    error: str | None = None


@dataclass(frozen=True)
class ExperimentTask:
    index: int
    entry: DatasetEntry
    prior: PitchPrior | None
    config: ExperimentConfig
    methods: tuple[str, ...]
    conditions: tuple[Condition, ...]
    delay_override_samples: int | None = None


@dataclass
class ExperimentResult:
    """Per-utterance results and their pooled reports, in a deterministic order."""

    methods: list[str]
    conditions: list[str]
    utterances: list[UtteranceResult] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    def results_for(self, method: str, condition: str) -> list[UtteranceResult]:
        return [u for u in self.utterances if u.report.method == method and u.report.condition == condition]

    def report(self, method: str, condition: str) -> EvalReport | None:
        """Database-level report pooling the cycles of every recording."""
        results = self.results_for(method, condition)
        if not results:
            return None
        return EvalReport.pooled([u.report for u in results], method, condition)

    @property
    def reports(self) -> list[EvalReport]:
        """Pooled reports, condition-major."""
        pooled = (self.report(m, c) for c in self.conditions for m in self.methods)
        return [r for r in pooled if r is not None]

    def sweep_table(self) -> list[dict[str, Any]]:
        """Condition x method table of identification rates."""
        rows: list[dict[str, Any]] = []
        for condition in self.conditions:
            row: dict[str, Any] = {"condition": condition}
            for method in self.methods:
                report = self.report(method, condition)
                row[method] = report.idr_pct if report is not None else math.nan
            rows.append(row)
        return rows

    def records(self) -> Iterator[dict[str, Any]]:
        for utterance in self.utterances:
            yield utterance.to_record()

    def position_histograms(self) -> dict[str, FloatArray]:
        """Per-speaker counts of the GCI position within mean-based-signal cycles."""
        histograms: dict[str, FloatArray] = {}
        for utterance in self.utterances:
            if not utterance.positions:
                continue
            counts = np.asarray(utterance.positions, dtype=np.float64)
            histograms[utterance.speaker] = histograms.get(utterance.speaker, np.zeros(counts.size)) + counts
        return histograms


def prepare_recording(
    entry: DatasetEntry, prior: PitchPrior, config: ExperimentConfig, delay_override_samples: int | None = None
) -> PreparedRecording:
    """Load a speech/EGG pair, fix the speech polarity and place the EGG reference in speech time.

    ``delay_override_samples`` wins over the manifest alignment; without either, the delay is estimated.
    """
    fs = float(config.manifest.sample_rate_hz)
    speech = load_waveform(entry.speech, fs)
    egg = load_waveform(entry.egg, fs)
    n = min(len(speech), len(egg))
    speech = speech.with_samples(speech.samples[:n])
    egg = egg.with_samples(egg.samples[:n])

    speech, flipped = ensure_polarity(speech, config.polarity, config.detector.lpc)
    cycles = build_cycles(reference_gcis(egg, prior), differenced_egg(egg))
    if delay_override_samples is not None:
        delay = delay_override_samples
    elif entry.alignment_samples is not None:
        delay = entry.alignment_samples
    else:
        delay = align_egg(speech, egg, config.max_lag_ms, config.detector.lpc)
    logger.debug(f"{entry.speech.name}: delay {delay} samples, {cycles.n_voiced} voiced cycles, flipped={flipped}")
    return PreparedRecording(entry.speech.stem, entry.speaker, speech, cycles.shifted(delay), prior, flipped, delay)


def evaluate_recording(
    recording: PreparedRecording,
    methods: Sequence[str],
    conditions: Sequence[Condition],
    config: ExperimentConfig,
) -> list[UtteranceResult]:
    """Every method under every condition, condition-major."""
    results: list[UtteranceResult] = []
    for condition in conditions:
        speech = apply_condition(recording.speech, condition)
        for method in methods:
            gcis = run_method(method, speech, recording.prior, config.detector)
            report = evaluate(recording.cycles, gcis, method, condition.name)
            positions: tuple[int, ...] = ()
            if condition.is_clean and method in _POSITION_METHODS and len(gcis) > 0:
                _, counts = gci_position_distribution(speech, recording.prior, gcis, config.detector, POSITION_BINS)
                positions = tuple(int(c) for c in counts)
            results.append(
                UtteranceResult(
                    recording.name,
                    recording.speaker,
                    report,
                    len(gcis),
                    recording.flipped,
                    recording.delay_samples,
                    positions,
                )
            )
    return results


def run_task(task: ExperimentTask) -> RecordingOutcome:
    """Process one manifest entry; failures are returned instead of raised."""
    name = task.entry.speech.stem
    try:
        if task.prior is None:
            raise ConfigurationError(f"no pitch prior for speaker {task.entry.speaker}")
        recording = prepare_recording(task.entry, task.prior, task.config, task.delay_override_samples)
        manager = ConfigManager(task.config)
        conditions = [manager.seeded_condition(c, task.index) for c in task.conditions]
        return RecordingOutcome(name, evaluate_recording(recording, task.methods, conditions, task.config))
    except Exception as e:
        logger.error(f"Failed to process {name}: {e}")
        return RecordingOutcome(name, error=str(e))


def run_experiment(
    config: ExperimentConfig,
    methods: Sequence[str] | None = None,
    condition_names: Sequence[str] | None = None,
    delay_override_samples: int | None = None,
    reporter: UIReporter | None = None,
) -> ExperimentResult:
    """Run the configured methods and conditions over the manifest.

    Recordings are processed in manifest order, in parallel when ``config.workers`` > 1;
    per-file failures are logged and skipped.
    """
    reporter = reporter or SilentReporter()
    manager = ConfigManager(config)
    selected_methods = manager.get_methods(methods)
    conditions = manager.get_conditions(condition_names)
    priors = manager.speaker_priors()
    tasks = [
        ExperimentTask(
            index,
            entry,
            priors.get(entry.speaker),
            config,
            tuple(selected_methods),
            tuple(conditions),
            delay_override_samples,
        )
        for index, entry in enumerate(config.manifest.entries)
    ]
    result = ExperimentResult(selected_methods, [c.name for c in conditions])
    logger.debug(f"Running {len(selected_methods)} methods x {len(conditions)} conditions on {len(tasks)} files")

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            _collect(result, pool.map(run_task, tasks), len(tasks), reporter)
    else:
        _collect(result, map(run_task, tasks), len(tasks), reporter)
    return result


def _collect(result: ExperimentResult, outcomes: Iterator[RecordingOutcome], total: int, reporter: UIReporter) -> None:
    for index, outcome in enumerate(outcomes, start=1):
        reporter.report_recording_start(index, total, outcome.name)
        if outcome.error is not None:
            result.failures.append((outcome.name, outcome.error))
            reporter.report_recording_error(outcome.name, outcome.error)
            continue
        result.utterances.extend(outcome.results)
        reporter.report_recording_success(outcome.name, len(outcome.results))


def load_speech(config: ExperimentConfig) -> list[tuple[Waveform, PitchPrior]]:
    """Polarity-corrected speech of every manifest entry with its speaker prior, for timing runs."""
    priors = ConfigManager(config).speaker_priors()
    fs = float(config.manifest.sample_rate_hz)
    recordings: list[tuple[Waveform, PitchPrior]] = []
    for entry in config.manifest.entries:
        prior = priors.get(entry.speaker)
        if prior is None:
            logger.warning(f"Skipping {entry.speech.stem}: no pitch prior for speaker {entry.speaker}")
            continue
        speech, _ = ensure_polarity(load_waveform(entry.speech, fs), config.polarity, config.detector.lpc)
        recordings.append((speech, prior))
    return recordings


def threshold_violations(
    thresholds: AcceptanceThresholds,
    reports: Sequence[EvalReport] = (),
    rct_ratios: dict[str, float] | None = None,
) -> list[str]:
    """Human-readable descriptions of every violated acceptance threshold."""
    violations: list[str] = []
    for report in reports:
        minimum = thresholds.min_idr_pct.get(report.method)
        if minimum is not None and report.idr_pct < minimum:
            violations.append(f"{report.method} [{report.condition}]: IDR {report.idr_pct:.2f}% < {minimum:.2f}%")
        maximum = thresholds.max_ida_ms.get(report.method)
        if maximum is not None and report.ida_ms > maximum:
            violations.append(f"{report.method} [{report.condition}]: IDA {report.ida_ms:.3f} ms > {maximum:.3f} ms")
    if thresholds.max_fast_ratio is not None:
        for method, ratio in (rct_ratios or {}).items():
            if ratio > thresholds.max_fast_ratio:
                violations.append(f"{method}: RCT ratio {ratio:.3f} > {thresholds.max_fast_ratio:.3f}")
    return violations


def rct_table(reports: Sequence[RctReport]) -> list[dict[str, Any]]:
    return [
        {"method": r.method, "rct_pct": r.rct_pct, "cpu_s": r.cpu_seconds, "audio_s": r.audio_seconds} for r in reports
    ]
