"""WAV input and output, result tables and GCI files for experiment runs."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

import numpy as np
import soundfile as sf
from scipy.signal import resample_poly

from .models import EvalReport
from .signals import GciSequence, Waveform

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["method", "condition", "n_cycles", "IDR", "MR", "FAR", "IDA_ms", "acc025"]


def format_value(value: Any) -> Any:
    """Floats at 6 significant digits; everything else unchanged."""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return value


def exact_value(value: float) -> str:
    """Shortest text that reads back as the same float; integral values without a fraction."""
    number = float(value)
    return str(int(number)) if number.is_integer() else repr(number)


def load_waveform(path: Path, sample_rate_hz: float | None = None) -> Waveform:
    """Read an audio file as mono float64, resampled to ``sample_rate_hz`` when given.

    Multichannel files are averaged to mono.
    """
    data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    samples = data.mean(axis=1)
    if sample_rate_hz is not None and int(rate) != int(sample_rate_hz):
        gcd = np.gcd(int(rate), int(sample_rate_hz))
        samples = resample_poly(samples, int(sample_rate_hz) // gcd, int(rate) // gcd)
        logger.debug(f"Resampled {path.name} from {rate} Hz to {sample_rate_hz:.0f} Hz")
        rate = sample_rate_hz
    return Waveform(np.asarray(samples, dtype=np.float64), float(rate))


def save_waveform(path: Path, waveform: Waveform, subtype: str = "PCM_16") -> None:
    """Write a waveform, clipping to [-1, 1] for integer formats."""
    path.parent.mkdir(parents=True, exist_ok=True)
    samples = waveform.samples
    if subtype.startswith("PCM"):
        peak = float(np.max(np.abs(samples)))
        if peak > 1.0:
            logger.warning(f"Clipping {path.name}: peak {peak:.3f} exceeds full scale")
        samples = np.clip(samples, -1.0, 1.0)
    sf.write(str(path), samples, int(round(waveform.sample_rate_hz)), subtype=subtype)
    logger.debug(f"Saved audio to: {path}")


class FileManager:
    """Handles output paths and report serialization."""

    def __init__(self, base_output_dir: Path):
        """Initialize file manager with base output directory.

        Args:
            base_output_dir: Base directory for output files
        """
        self.base_output_dir = base_output_dir
        self.base_output_dir.mkdir(parents=True, exist_ok=True)

    def create_output_path(self, filename: str, subdir: str | None = None) -> Path:
        """Path under the output directory; parent directories are created."""
        directory = self.base_output_dir / subdir if subdir else self.base_output_dir
        directory.mkdir(parents=True, exist_ok=True)
        return directory / filename

    def write_rows(self, path: Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> Path:
        """Write a CSV table with the given column order."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: format_value(value) for key, value in row.items()})
        logger.debug(f"Wrote table to: {path}")
        return path

    def write_summary(self, reports: Sequence[EvalReport], filename: str = "summary.csv") -> Path:
        """Table with one row per (method, condition)."""
        return self.write_rows(
            self.create_output_path(filename), SUMMARY_COLUMNS, (r.summary_row() for r in reports)
        )

    def write_histogram(
        self, report: EvalReport, limit_ms: float = 1.0, bin_ms: float = 0.05, subdir: str = "histograms"
    ) -> Path:
        centers, counts = report.histogram(limit_ms, bin_ms)
        path = self.create_output_path(f"{report.method}_{report.condition}.csv", subdir)
        rows = ({"bin_center_ms": float(c), "count": int(n)} for c, n in zip(centers, counts))
        return self.write_rows(path, ["bin_center_ms", "count"], rows)

    def write_jsonl(self, path: Path, records: Iterable[Mapping[str, Any]]) -> Path:
        """Line-delimited JSON, floats at 6 significant digits."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(_rounded(record)) + "\n")
        logger.debug(f"Wrote records to: {path}")
        return path

    @staticmethod
    def write_gcis(path: Path, gcis: GciSequence, as_csv: bool | None = None) -> Path:
        """GCI list as one time in seconds per line, or CSV ``index,sample,time_s`` for .csv paths.

        Values are written at full precision so that long recordings keep sample resolution.
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        use_csv = path.suffix.lower() == ".csv" if as_csv is None else as_csv
        with open(path, "w", newline="", encoding="utf-8") as f:
            if use_csv:
                writer = csv.writer(f)
                writer.writerow(["index", "sample", "time_s"])
                for i, (sample, t) in enumerate(zip(gcis.instants, gcis.times_s)):
                    writer.writerow([i, exact_value(sample), exact_value(t)])
            else:
                for t in gcis.times_s:
                    f.write(f"{exact_value(t)}\n")
        return path

    @staticmethod
    def read_gcis(path: Path, sample_rate_hz: float) -> GciSequence:
        """Read a list written by ``write_gcis``."""
        if path.suffix.lower() == ".csv":
            with open(path, newline="", encoding="utf-8") as f:
                instants = [float(row["sample"]) for row in csv.DictReader(f)]
        else:
            instants = [float(line) * sample_rate_hz for line in path.read_text(encoding="utf-8").split()]
        return GciSequence(np.asarray(instants), sample_rate_hz, path.stem)


def _rounded(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.6g}")
    if isinstance(value, np.integer):
        return int(value)
    return value
