"""Relative computation time of the detection methods."""

from __future__ import annotations

import logging
import statistics
import time
from collections.abc import Sequence

from .methods import MethodRegistry
from .models import DetectorSettings, RctReport
from .signals import PitchPrior, Waveform

logger = logging.getLogger(__name__)

Recording = tuple[Waveform, PitchPrior]


def cpu_seconds(method: str, recordings: Sequence[Recording], settings: DetectorSettings) -> float:
    """Process CPU time spent detecting GCIs over every recording."""
    detector = MethodRegistry.get(method)
    start = time.process_time()
    for speech, prior in recordings:
        detector(speech, prior, settings)
    return time.process_time() - start


def bench_rct(
    methods: Sequence[str],
    recordings: Sequence[Recording],
    repetitions: int = 3,
    settings: DetectorSettings | None = None,
) -> list[RctReport]:
    """Median CPU time of detection only, relative to the audio duration.

    Recordings are loaded by the caller; a warm-up pass on the first recording runs
    before any timing.
    """
    if not recordings:
        raise ValueError("At least one recording is required to measure RCT")
    if repetitions < 1:
        raise ValueError(f"Repetitions must be at least 1, got {repetitions}")
    settings = settings or DetectorSettings()
    audio_seconds = sum(speech.duration_s for speech, _ in recordings)

    reports: list[RctReport] = []
    for method in methods:
        cpu_seconds(method, recordings[:1], settings)
        timings = [cpu_seconds(method, recordings, settings) for _ in range(repetitions)]
        report = RctReport(method=method, audio_seconds=audio_seconds, cpu_seconds=statistics.median(timings))
        logger.debug(f"{method}: RCT {report.rct_pct:.2f}% over {audio_seconds:.1f} s ({repetitions} runs)")
        reports.append(report)
    return reports


def relative_ordering(reports: Sequence[RctReport]) -> list[str]:
    """Method names from fastest to slowest."""
    return [r.method for r in sorted(reports, key=lambda r: r.rct_pct)]


def fast_ratios(reports: Sequence[RctReport]) -> dict[str, float]:
    """RCT of each fast variant divided by the RCT of its full method, when both were measured."""
    by_method = {r.method: r for r in reports}
    ratios: dict[str, float] = {}
    for method, report in by_method.items():
        full = MethodRegistry.full_method(method)
        if full is None or full not in by_method or by_method[full].cpu_seconds == 0:
            continue
        ratios[method] = report.rct_pct / by_method[full].rct_pct
    return ratios
