"""DYPSA detector: group-delay candidates with phase-slope projection and dynamic-programming selection.

The candidate lattice and its selection are shared with the YAGA detector.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from numpy.typing import NDArray
from scipy.ndimage import maximum_filter1d

from .dsp import CrossingDirection, local_maxima, local_minima, lp_analysis, zero_crossings
from .exceptions import ConfigurationError
from .models import CostWeights, DetectorSettings
from .signals import MAX_F0_HZ, MIN_F0_HZ, FloatArray, GciSequence, PitchPrior, Waveform, strictly_increasing

logger = logging.getLogger(__name__)

COST_NAMES = ("amplitude", "pitch", "projected", "energy", "slope")
INERT_RATIO = 1e-12


class CandidateOrigin(str, Enum):
    """How a candidate was generated from the group delay signal."""

    ZERO_CROSSING = "zero_crossing"
    PROJECTED = "projected"


@dataclass(frozen=True)
class Candidate:
    """Timed GCI candidate.

    ``costs`` holds (c_A, c_P, c_J, c_F, c_S). The first two depend on the preceding
    candidate and stay 0 until a path has been selected.
    """

    time: float
    origin: CandidateOrigin
    slope: float = -1.0
    costs: FloatArray = field(default_factory=lambda: np.zeros(len(COST_NAMES)))

    def with_costs(self, costs: FloatArray) -> Candidate:
        return replace(self, costs=np.asarray(costs, dtype=np.float64))

    def shifted(self, offset: float) -> Candidate:
        return replace(self, time=self.time + offset)


@dataclass(frozen=True)
class GroupDelaySignal:
    """Energy-weighted group delay d(n) of the window starting at n, in samples."""

    values: FloatArray
    inert: NDArray[np.bool_]
    window_length: int
    sample_rate_hz: float

    @property
    def offset(self) -> float:
        """Shift from a d-index crossing to the event time."""
        return (self.window_length - 1) / 2.0


def group_delay_window(sample_rate_hz: float, max_f0_hz: float = MAX_F0_HZ, factor: float = 1.2) -> int:
    """Window length R = factor * (shortest period) / 2, at least 4 samples."""
    return max(4, int(round(factor * (sample_rate_hz / max_f0_hz) / 2.0)))


def ewgd(e: Waveform, window_length: int, block: int = 4096) -> GroupDelaySignal:
    """Energy-weighted group delay with sliding sums.

    d(n) = sum_r r e(n+r)^2 / sum_r e(n+r)^2 - (R-1)/2 for r = 0..R-1, zero-padded past the end.
    Sums are accumulated per block in local coordinates to keep the cumulative sums small.
    """
    if window_length < 4:
        raise ConfigurationError(f"Group delay window must be at least 4 samples, got {window_length}")
    R = window_length
    energy = np.concatenate((e.samples**2, np.zeros(R)))
    n = len(e)
    weighted = np.zeros(n)
    total = np.zeros(n)
    for start in range(0, n, block):
        stop = min(n, start + block)
        segment = energy[start : stop + R - 1]
        local = np.arange(segment.size, dtype=np.float64)
        c0 = np.concatenate(([0.0], np.cumsum(segment)))
        c1 = np.concatenate(([0.0], np.cumsum(local * segment)))
        i = np.arange(stop - start)
        window_energy = c0[i + R] - c0[i]
        total[start:stop] = window_energy
        weighted[start:stop] = c1[i + R] - c1[i] - i * window_energy

    inert = ~(total > INERT_RATIO * total.max()) if total.size else np.zeros(0, dtype=bool)
    values = np.zeros(n)
    np.divide(weighted, total, out=values, where=~inert)
    half = (R - 1) / 2.0
    values = np.where(inert, 0.0, np.clip(values - half, -half, half))
    return GroupDelaySignal(values, inert, R, e.sample_rate_hz)


def phase_slope_project(d: GroupDelaySignal) -> list[Candidate]:
    """Candidates from negative-going crossings of d, plus projections of crossing-free min/max pairs.

    A local minimum at n1 followed by a local maximum at n2 with no crossing in between is projected
    along a line of slope -1 through the midpoint: t = (n1 + n2)/2 + (d(n1) + d(n2))/2.
    Times are in d-index coordinates; add ``d.offset`` for event times.
    """
    values = d.values
    candidates: list[Candidate] = []

    crossings = zero_crossings(values, CrossingDirection.NEGATIVE_GOING, inert=d.inert)
    for t in crossings:
        i = int(t)
        candidates.append(Candidate(float(t), CandidateOrigin.ZERO_CROSSING, float(values[i + 1] - values[i])))

    minima = local_minima(values)
    maxima = local_maxima(values)
    if minima.size and maxima.size:
        inert_count = np.concatenate(([0], np.cumsum(d.inert)))
        follower = np.searchsorted(maxima, minima, side="right")
        for n1, k in zip(minima, follower):
            if k >= maxima.size:
                continue
            n2 = int(maxima[k])
            span = values[n1 : n2 + 1]
            if inert_count[n2 + 1] - inert_count[n1] > 0:
                continue
            if not (np.all(span > 0) or np.all(span < 0)):
                continue
            t = (n1 + n2) / 2.0 + (values[n1] + values[n2]) / 2.0
            candidates.append(Candidate(float(t), CandidateOrigin.PROJECTED))

    candidates.sort(key=lambda c: c.time)
    return candidates


# Cost elements. Each returns values in [-0.5, 0.5]; lower is better.


def projected_cost(origin: CandidateOrigin) -> float:
    return 0.5 if origin == CandidateOrigin.PROJECTED else -0.5


def slope_cost(slope: float) -> float:
    return min(abs(slope + 1.0), 1.0) - 0.5


def pitch_cost(previous_period: float, period: float) -> float:
    """Relative deviation between consecutive periods, shifted and clipped to [-0.5, 0.5]."""
    deviation = abs(period - previous_period) / (0.5 * (period + previous_period))
    return float(np.clip(deviation - 0.5, -0.5, 0.5))


def energy_costs(speech: FloatArray, times: FloatArray, period: float) -> FloatArray:
    """0.5 - E(t)/max(E) where E sums speech energy over a quarter period from t.

    The maximum is taken over +/- one mean period around t.
    """
    span = max(1, int(round(period / 4)))
    cumulative = np.concatenate(([0.0], np.cumsum(speech**2)))
    starts = np.arange(speech.size)
    local = cumulative[np.minimum(starts + span, speech.size)] - cumulative[starts]
    peak = maximum_filter1d(local, size=2 * int(round(period)) + 1, mode="constant")
    idx = np.clip(np.rint(times).astype(np.int64), 0, speech.size - 1)
    ratio = np.zeros(idx.size)
    np.divide(local[idx], peak[idx], out=ratio, where=peak[idx] > 0)
    return 0.5 - ratio


def similarity_segments(signal: FloatArray, times: FloatArray, period: float) -> FloatArray:
    """Unit-norm segments [t - T/4, t + T/2) around each candidate, one row per candidate."""
    before = int(round(period / 4))
    after = int(round(period / 2))
    padded = np.pad(signal, (before, after))
    idx = np.clip(np.rint(times).astype(np.int64), 0, signal.size - 1)
    rows = padded[idx[:, None] + np.arange(before + after)[None, :]]
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    unit = np.zeros_like(rows)
    np.divide(rows, norms, out=unit, where=norms > 0)
    return unit


@dataclass(frozen=True)
class CandidateLattice:
    """Weighted costs of a time-sorted candidate set, ready for path selection."""

    times: FloatArray
    unary: FloatArray
    segments: FloatArray
    amplitude_weight: float
    pitch_weight: float
    mean_period: float
    min_period: float
    max_period: float

    def __len__(self) -> int:
        return int(self.times.size)

    def amplitude_cost(self, q: int, r: int) -> float:
        """-0.5 times the normalized correlation of the two candidates' waveforms."""
        return -0.5 * float(self.segments[q] @ self.segments[r])

    def transition(self, previous_period: float, q: int, r: int) -> float:
        period = float(self.times[r] - self.times[q])
        return self.amplitude_weight * self.amplitude_cost(q, r) + self.pitch_weight * pitch_cost(
            previous_period, period
        )

    def subset(self, start: int, stop: int) -> CandidateLattice:
        return replace(
            self,
            times=self.times[start:stop],
            unary=self.unary[start:stop],
            segments=self.segments[start:stop],
        )


def period_bounds(prior: PitchPrior) -> tuple[float, float]:
    """Allowed spacing between consecutive GCIs of one chain."""
    fs = prior.sample_rate_hz
    t0 = prior.mean_period_samples
    return max(fs / MAX_F0_HZ, 0.5 * t0), min(fs / MIN_F0_HZ, 2.0 * t0)


def chain_cost(lattice: CandidateLattice, selected: Sequence[int]) -> float:
    """Total cost of a selected subset.

    Spacing below the minimum period is invalid (inf); spacing above the maximum
    period starts a new chain, whose first period is compared with the mean period.
    """
    total = 0.0
    previous_period: float | None = None
    for k, r in enumerate(selected):
        total += float(lattice.unary[r])
        if k == 0:
            continue
        q = selected[k - 1]
        gap = float(lattice.times[r] - lattice.times[q])
        if gap < lattice.min_period:
            return math.inf
        if gap > lattice.max_period:
            previous_period = None
            continue
        total += lattice.transition(lattice.mean_period if previous_period is None else previous_period, q, r)
        previous_period = gap
    return total


def best_path(lattice: CandidateLattice, beam_width: int | None = 5) -> tuple[list[int], float]:
    """Minimum-cost subset by dynamic programming over (predecessor, candidate) states.

    Each candidate keeps one chain-start state and at most ``beam_width`` continuation
    states; ``None`` keeps every state and gives the exact minimum of ``chain_cost``.
    """
    times = lattice.times
    n = len(lattice)
    if n == 0:
        return [], 0.0

    costs: list[float] = []
    parents: list[int] = []
    ends: list[int] = []
    periods: list[float] = []
    states_at: list[list[int]] = [[] for _ in range(n)]
    prefix_cost = np.full(n, np.inf)
    prefix_state = np.full(n, -1, dtype=np.int64)

    def add_state(cost: float, parent: int, end: int, period: float) -> int:
        costs.append(cost)
        parents.append(parent)
        ends.append(end)
        periods.append(period)
        return len(costs) - 1

    for r in range(n):
        unary = float(lattice.unary[r])

        # Chain start: the best earlier path ending more than one maximum period before r, or nothing.
        j = int(np.searchsorted(times, times[r] - lattice.max_period, side="left"))
        if j > 0 and prefix_cost[j - 1] < 0:
            start = add_state(prefix_cost[j - 1] + unary, int(prefix_state[j - 1]), r, math.nan)
        else:
            start = add_state(unary, -1, r, math.nan)
        states_at[r].append(start)

        lo = int(np.searchsorted(times, times[r] - lattice.max_period, side="left"))
        hi = min(r, int(np.searchsorted(times, times[r] - lattice.min_period, side="right")))
        continuations: list[tuple[float, int, float]] = []
        for q in range(lo, hi):
            gap = float(times[r] - times[q])
            best, best_parent = math.inf, -1
            for s in states_at[q]:
                previous = lattice.mean_period if math.isnan(periods[s]) else periods[s]
                cost = costs[s] + lattice.transition(previous, q, r)
                if cost < best:
                    best, best_parent = cost, s
            if best_parent >= 0:
                continuations.append((best + unary, best_parent, gap))
        if beam_width is not None and len(continuations) > beam_width:
            continuations = sorted(continuations)[:beam_width]
        for cost, parent, gap in continuations:
            states_at[r].append(add_state(cost, parent, r, gap))

        end_state = min(states_at[r], key=lambda s: costs[s])
        if r > 0 and prefix_cost[r - 1] <= costs[end_state]:
            prefix_cost[r], prefix_state[r] = prefix_cost[r - 1], prefix_state[r - 1]
        else:
            prefix_cost[r], prefix_state[r] = costs[end_state], end_state

    if prefix_cost[n - 1] >= 0:
        return [], 0.0
    path: list[int] = []
    state = int(prefix_state[n - 1])
    while state >= 0:
        path.append(ends[state])
        state = parents[state]
    path.reverse()
    return path, float(prefix_cost[n - 1])


def build_lattice(
    candidates: Sequence[Candidate],
    speech: Waveform,
    prior: PitchPrior,
    weights: CostWeights,
    similarity_signal: FloatArray | None = None,
    extra_unary: FloatArray | None = None,
) -> tuple[CandidateLattice, list[Candidate]]:
    """Score candidates against the speech and assemble the weighted lattice.

    Returns the lattice together with the candidates carrying their unary cost elements.
    """
    prior = prior.at_rate(speech.sample_rate_hz)
    period = prior.mean_period_samples
    times = np.array([c.time for c in candidates], dtype=np.float64)
    energy = energy_costs(speech.samples, times, period) if times.size else np.zeros(0)
    scored: list[Candidate] = []
    for c, c_f in zip(candidates, energy):
        costs = np.array([0.0, 0.0, projected_cost(c.origin), c_f, slope_cost(c.slope)])
        scored.append(c.with_costs(costs))

    unary = np.array([c.costs for c in scored], dtype=np.float64).reshape(-1, len(COST_NAMES)) @ weights.as_array()
    if extra_unary is not None:
        unary = unary + np.asarray(extra_unary, dtype=np.float64)
    reference = speech.samples if similarity_signal is None else similarity_signal
    segments = similarity_segments(reference, times, period) if times.size else np.zeros((0, 1))
    min_period, max_period = period_bounds(prior)
    lattice = CandidateLattice(
        times=times,
        unary=unary,
        segments=segments,
        amplitude_weight=weights.amplitude,
        pitch_weight=weights.pitch,
        mean_period=period,
        min_period=min_period,
        max_period=max_period,
    )
    return lattice, scored


def _restart_points(times: FloatArray, gap: float) -> list[tuple[int, int]]:
    breaks = np.flatnonzero(np.diff(times) > gap) + 1
    edges = [0, *breaks.tolist(), times.size]
    return list(zip(edges[:-1], edges[1:]))


def dp_select(
    candidates: Sequence[Candidate],
    speech: Waveform,
    prior: PitchPrior,
    weights: CostWeights | None = None,
    beam_width: int | None = 5,
    restart_gap_periods: float = 10.0,
    similarity_signal: FloatArray | None = None,
    extra_unary: FloatArray | None = None,
    source: str = "dypsa",
) -> GciSequence:
    """Select the GCI subset minimizing the weighted cost sum.

    The lattice is split wherever candidates are more than ``restart_gap_periods`` mean
    periods apart and each part is solved on its own.
    """
    weights = weights or CostWeights()
    if not candidates:
        return GciSequence.empty(speech.sample_rate_hz, source)
    if any(b.time <= a.time for a, b in zip(candidates, candidates[1:])):
        raise ValueError("Candidates must be sorted by strictly increasing time")

    lattice, _ = build_lattice(candidates, speech, prior, weights, similarity_signal, extra_unary)
    gap = restart_gap_periods * lattice.mean_period
    selected: list[int] = []
    total = 0.0
    for start, stop in _restart_points(lattice.times, gap):
        path, cost = best_path(lattice.subset(start, stop), beam_width)
        selected.extend(start + i for i in path)
        total += cost
    logger.debug(f"{source}: selected {len(selected)} of {len(candidates)} candidates, cost {total:.3f}")
    return GciSequence(lattice.times[selected], speech.sample_rate_hz, source)


def dedupe_candidates(candidates: Sequence[Candidate], num_samples: int) -> list[Candidate]:
    """Keep in-range candidates with strictly increasing times (zero crossings win ties)."""
    ordered = sorted(candidates, key=lambda c: (c.time, c.origin != CandidateOrigin.ZERO_CROSSING))
    kept: list[Candidate] = []
    for c in ordered:
        if not 0 <= c.time < num_samples:
            continue
        if kept and c.time <= kept[-1].time:
            continue
        kept.append(c)
    return kept


def group_delay_candidates(signal: Waveform, settings: DetectorSettings) -> list[Candidate]:
    """Phase-slope-projected candidates of a signal, in event time."""
    window = group_delay_window(signal.sample_rate_hz, settings.max_f0_hz, settings.group_delay_factor)
    d = ewgd(signal, window)
    projected = [c.shifted(d.offset) for c in phase_slope_project(d)]
    return dedupe_candidates(projected, len(signal))


def detect_dypsa(x: Waveform, prior: PitchPrior, settings: DetectorSettings | None = None) -> GciSequence:
    """GCIs from group-delay candidates of the LP residual, selected by dynamic programming."""
    settings = settings or DetectorSettings()
    if len(x) < 4:
        return GciSequence.empty(x.sample_rate_hz, "dypsa")
    residual = x.with_samples(lp_analysis(x, settings.lpc).residual)
    candidates = group_delay_candidates(residual, settings)
    gcis = dp_select(
        candidates,
        x,
        prior,
        settings.weights,
        beam_width=settings.beam_width,
        restart_gap_periods=settings.restart_gap_periods,
        source="dypsa",
    )
    return GciSequence(strictly_increasing(gcis.instants), x.sample_rate_hz, "dypsa")
