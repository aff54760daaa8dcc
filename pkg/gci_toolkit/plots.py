"""Figures for error histograms, condition sweeps and centre-of-gravity distributions.

Figures are drawn with the object-oriented matplotlib API so no GUI backend is needed.
"""

import logging
from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .models import EvalReport
from .signals import FloatArray

logger = logging.getLogger(__name__)


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(str(path), dpi=120)
    logger.debug(f"Saved figure to: {path}")
    return path


def plot_error_histogram(report: EvalReport, path: Path, limit_ms: float = 1.0, bin_ms: float = 0.05) -> Path:
    """Timing errors of identified cycles, in ms."""
    centers, counts = report.histogram(limit_ms, bin_ms)
    total = max(1, int(np.sum(counts)))
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    ax.bar(centers, 100.0 * counts / total, width=bin_ms, color="tab:blue", edgecolor="white")
    ax.set_xlim(-limit_ms, limit_ms)
    ax.set_xlabel("Timing error (ms)")
    ax.set_ylabel("Identified cycles (%)")
    ax.set_title(f"{report.method} [{report.condition}]  IDA {report.ida_ms:.3f} ms")
    return _save(fig, path)


def plot_sweep(
    series: Mapping[str, Sequence[tuple[float, float]]], path: Path, xlabel: str, title: str = ""
) -> Path:
    """Identification rate against a condition parameter, one line per method."""
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    for method, points in series.items():
        if not points:
            continue
        xs, ys = zip(*sorted(points))
        ax.plot(xs, ys, marker="o", label=method)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("IDR (%)")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def plot_cog_histogram(cog_hz: FloatArray, threshold_hz: float, path: Path, bins: int = 40) -> Path:
    """Distribution of anticausal spectral centres of gravity with the success threshold marked."""
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    ax.hist(cog_hz, bins=bins, color="tab:gray", edgecolor="white")
    ax.axvline(threshold_hz, color="tab:red", linestyle="--", label=f"{threshold_hz:.0f} Hz")
    ax.set_xlabel("Spectral centre of gravity (Hz)")
    ax.set_ylabel("Frames")
    ax.legend()
    return _save(fig, path)


def plot_position_histogram(counts: FloatArray, path: Path, speaker: str) -> Path:
    """GCI position within mean-based-signal cycles, as a fraction of the cycle."""
    edges = np.linspace(0.0, 1.0, counts.size + 1)
    fig = Figure(figsize=(6, 4))
    ax = fig.subplots()
    ax.bar(0.5 * (edges[:-1] + edges[1:]), counts, width=1.0 / counts.size, edgecolor="white")
    ax.set_xlabel("Position in cycle (fraction of period)")
    ax.set_ylabel("GCIs")
    ax.set_title(f"Speaker {speaker}")
    return _save(fig, path)
