"""Tests for group delay, phase-slope projection and dynamic-programming selection."""

import itertools
import math

import numpy as np
import pytest

from gci_toolkit.dypsa import (
    Candidate,
    CandidateLattice,
    CandidateOrigin,
    GroupDelaySignal,
    best_path,
    build_lattice,
    chain_cost,
    dedupe_candidates,
    detect_dypsa,
    dp_select,
    ewgd,
    group_delay_window,
    phase_slope_project,
    pitch_cost,
    projected_cost,
    slope_cost,
)
from gci_toolkit.evaluation import ReferenceCycles, evaluate
from gci_toolkit.exceptions import ConfigurationError
from gci_toolkit.models import CostWeights
from gci_toolkit.signals import PitchPrior, Waveform
from gci_toolkit.synthetic import SyntheticUtterance


def random_lattice(rng: np.random.Generator, size: int) -> CandidateLattice:
    times = np.cumsum(rng.uniform(20.0, 260.0, size))
    segments = rng.standard_normal((size, 8))
    segments /= np.linalg.norm(segments, axis=1, keepdims=True)
    return CandidateLattice(
        times=times,
        unary=rng.uniform(-1.0, 0.5, size),
        segments=segments,
        amplitude_weight=0.8,
        pitch_weight=0.5,
        mean_period=100.0,
        min_period=50.0,
        max_period=200.0,
    )


def exhaustive_minimum(lattice: CandidateLattice) -> float:
    best = 0.0
    for k in range(1, len(lattice) + 1):
        for subset in itertools.combinations(range(len(lattice)), k):
            best = min(best, chain_cost(lattice, subset))
    return best


class TestGroupDelay:
    """Test the energy-weighted group delay."""

    def test_sliding_sums_match_direct_evaluation(self) -> None:
        """Test that block-wise sliding sums equal a window-by-window evaluation."""
        rng = np.random.default_rng(0)
        e = Waveform(rng.standard_normal(3000), 16000.0)
        window = 64
        d = ewgd(e, window, block=700)

        padded = np.concatenate((e.samples**2, np.zeros(window)))
        r = np.arange(window)
        half = (window - 1) / 2.0
        expected = np.array(
            [np.sum(r * padded[n : n + window]) / np.sum(padded[n : n + window]) - half for n in range(len(e))]
        )
        np.testing.assert_allclose(d.values, np.clip(expected, -half, half), atol=1e-8)
        assert not np.any(d.inert)

    @pytest.mark.parametrize("window", [19, 64])
    def test_sliding_sums_match_spectral_group_delay(self, window: int) -> None:
        """Test against the energy-weighted average of the DFT group delay on 100 random windows."""
        rng = np.random.default_rng(7)
        samples = rng.standard_normal(20000) * np.repeat(rng.uniform(0.2, 2.0, 40), 500)
        d = ewgd(Waveform(samples, 16000.0), window)
        half = (window - 1) / 2.0
        size = 2 * window
        r = np.arange(window)

        for n in rng.integers(0, samples.size - window, 100):
            x = samples[n : n + window]
            spectrum = np.fft.rfft(x, size)
            ramp_spectrum = np.fft.rfft(r * x, size)
            weights = np.full(spectrum.size, 2.0)
            weights[0] = 1.0
            if size % 2 == 0:
                weights[-1] = 1.0
            cross = np.sum(weights * np.real(ramp_spectrum * np.conj(spectrum)))
            power = np.sum(weights * np.abs(spectrum) ** 2)
            assert d.values[n] + half == pytest.approx(cross / power, rel=1e-9)

    def test_impulse_crosses_at_its_position(self) -> None:
        """Test that an isolated impulse yields a candidate on the impulse after the offset."""
        samples = np.zeros(400)
        samples[200] = 1.0
        d = ewgd(Waveform(samples, 16000.0), 20)
        times = [c.time + d.offset for c in phase_slope_project(d)]
        assert any(abs(t - 200.0) <= 1.0 for t in times)

    def test_window_length(self) -> None:
        """Test the default window of 1.2 half shortest periods."""
        assert group_delay_window(16000.0) == 19
        assert group_delay_window(1000.0) == 4

    def test_rejects_short_window(self) -> None:
        """Test that windows under four samples are invalid."""
        with pytest.raises(ConfigurationError):
            ewgd(Waveform(np.ones(100), 16000.0), 3)


class TestPhaseSlopeProjection:
    """Test candidate generation from the group delay signal."""

    def test_projects_crossing_free_extrema(self) -> None:
        """Test that a minimum followed by a maximum of one sign is projected with unit slope."""
        values = np.array([5.0, 3.0, 1.0, 2.0, 4.0, 3.5, 3.0])
        d = GroupDelaySignal(values, np.zeros(values.size, dtype=bool), 8, 16000.0)
        candidates = phase_slope_project(d)
        assert len(candidates) == 1
        assert candidates[0].origin == CandidateOrigin.PROJECTED
        assert candidates[0].time == pytest.approx(5.5)

    def test_zero_crossing_candidate_with_slope(self) -> None:
        """Test that negative-going crossings carry the local slope."""
        values = np.array([2.0, 1.0, -1.0, -2.0])
        d = GroupDelaySignal(values, np.zeros(4, dtype=bool), 8, 16000.0)
        candidates = phase_slope_project(d)
        assert [c.origin for c in candidates] == [CandidateOrigin.ZERO_CROSSING]
        assert candidates[0].time == pytest.approx(1.5)
        assert candidates[0].slope == pytest.approx(-2.0)

    def test_dedupe_prefers_zero_crossings(self) -> None:
        """Test that ties keep the zero-crossing candidate and out-of-range times are dropped."""
        candidates = [
            Candidate(10.0, CandidateOrigin.PROJECTED),
            Candidate(10.0, CandidateOrigin.ZERO_CROSSING),
            Candidate(-1.0, CandidateOrigin.ZERO_CROSSING),
            Candidate(120.0, CandidateOrigin.PROJECTED),
        ]
        kept = dedupe_candidates(candidates, 100)
        assert [(c.time, c.origin) for c in kept] == [(10.0, CandidateOrigin.ZERO_CROSSING)]


class TestCostElements:
    """Test the individual cost elements."""

    def test_cost_ranges(self) -> None:
        """Test values at the ends of each cost element's range."""
        assert projected_cost(CandidateOrigin.PROJECTED) == 0.5
        assert projected_cost(CandidateOrigin.ZERO_CROSSING) == -0.5
        assert slope_cost(-1.0) == -0.5
        assert slope_cost(5.0) == 0.5
        assert pitch_cost(100.0, 100.0) == -0.5
        assert pitch_cost(100.0, 200.0) == pytest.approx(100.0 / 150.0 - 0.5)

    def test_chain_cost_rejects_short_spacing(self) -> None:
        """Test that spacing below the minimum period is infeasible."""
        lattice = random_lattice(np.random.default_rng(1), 3)
        lattice = CandidateLattice(
            times=np.array([0.0, 30.0, 130.0]),
            unary=lattice.unary,
            segments=lattice.segments,
            amplitude_weight=0.8,
            pitch_weight=0.5,
            mean_period=100.0,
            min_period=50.0,
            max_period=200.0,
        )
        assert chain_cost(lattice, [0, 1]) == math.inf
        assert math.isfinite(chain_cost(lattice, [0, 2]))

    def test_unary_cost_is_weighted_sum(self, vowel: SyntheticUtterance) -> None:
        """Test that each candidate's unary cost weighs its projected, energy and slope elements."""
        candidates = [
            Candidate(300.0, CandidateOrigin.ZERO_CROSSING, -1.0),
            Candidate(460.0, CandidateOrigin.PROJECTED),
        ]
        weights = CostWeights(projected=1.0, energy=0.0, slope=2.0)
        lattice, scored = build_lattice(candidates, vowel.speech, vowel.prior, weights)
        assert [c.costs[0] for c in scored] == [0.0, 0.0]
        assert lattice.unary.tolist() == pytest.approx(
            [projected_cost(c.origin) + 2.0 * slope_cost(c.slope) for c in candidates]
        )
        assert lattice.amplitude_weight == weights.amplitude


class TestDynamicProgramming:
    """Test path selection against an exhaustive search."""

    def test_matches_exhaustive_search(self) -> None:
        """Test that unpruned DP finds the minimum over every subset of 200 random lattices."""
        rng = np.random.default_rng(42)
        for _ in range(200):
            lattice = random_lattice(rng, int(rng.integers(1, 11)))
            path, cost = best_path(lattice, beam_width=None)
            expected = exhaustive_minimum(lattice)
            assert cost == pytest.approx(expected, abs=1e-9)
            if path:
                assert chain_cost(lattice, path) == pytest.approx(cost, abs=1e-9)

    def test_beam_never_beats_exact(self) -> None:
        """Test that pruning can only raise the selected cost."""
        rng = np.random.default_rng(7)
        for _ in range(50):
            lattice = random_lattice(rng, 10)
            _, exact = best_path(lattice, beam_width=None)
            _, pruned = best_path(lattice, beam_width=2)
            assert pruned >= exact - 1e-12

    def test_empty_lattice(self) -> None:
        """Test that no candidates select nothing."""
        lattice = random_lattice(np.random.default_rng(0), 0)
        assert best_path(lattice) == ([], 0.0)

    def test_dp_select_rejects_unsorted(self, vowel: SyntheticUtterance) -> None:
        """Test that candidate times must be strictly increasing."""
        candidates = [Candidate(20.0, CandidateOrigin.ZERO_CROSSING), Candidate(10.0, CandidateOrigin.ZERO_CROSSING)]
        with pytest.raises(ValueError):
            dp_select(candidates, vowel.speech, vowel.prior)


class TestDetectDypsa:
    """Test DYPSA end to end."""

    def test_identifies_most_cycles(self, vowel: SyntheticUtterance, true_cycles: ReferenceCycles) -> None:
        """Test identification rate on a clean synthetic vowel."""
        gcis = detect_dypsa(vowel.speech, vowel.prior)
        assert gcis.source == "dypsa"
        assert np.all(np.diff(gcis.instants) > 0)
        assert evaluate(true_cycles, gcis).idr_pct > 75.0

    def test_short_input(self) -> None:
        """Test that inputs under four samples return an empty sequence."""
        x = Waveform(np.array([0.1, 0.2, 0.1]), 16000.0)
        assert len(detect_dypsa(x, PitchPrior.from_f0(100.0, 16000.0))) == 0
