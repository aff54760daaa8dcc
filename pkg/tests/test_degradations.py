"""Tests for additive noise and simulated reverberation."""

import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from gci_toolkit.degradations import (
    add_noise,
    apply_condition,
    convolve_rir,
    direct_path_delay,
    measure_t60,
    noise_source,
    reflection_for_t60,
    schroeder_decay_db,
    segmental_snr,
    simulate_rir,
)
from gci_toolkit.exceptions import DegradationError
from gci_toolkit.file_manager import save_waveform
from gci_toolkit.models import Condition, NoiseKind, NoiseSpec, RoomSpec
from gci_toolkit.signals import Waveform
from gci_toolkit.synthetic import SyntheticUtterance

FS = 16000.0


class TestNoise:
    """Test additive noise at a target segmental SNR."""

    def test_segmental_snr_of_constant_frames(self) -> None:
        """Test that a tenfold amplitude ratio in every frame gives 20 dB."""
        assert segmental_snr(np.ones(1024), 0.1 * np.ones(1024), 256) == pytest.approx(20.0)

    @pytest.mark.parametrize("snr_db", [-5.0, 0.0, 10.0, 20.0])
    def test_hits_target_snr(self, vowel: SyntheticUtterance, snr_db: float) -> None:
        """Test that the added noise has exactly the requested mean segmental SNR."""
        spec = NoiseSpec(snr_db=snr_db, seed=3)
        noisy = add_noise(vowel.speech, spec)
        frame = int(round(spec.frame_ms * FS / 1000.0))
        measured = segmental_snr(vowel.speech.samples, noisy.samples - vowel.speech.samples, frame)
        assert measured == pytest.approx(snr_db, abs=1e-6)

    def test_same_seed_same_noise(self) -> None:
        """Test that the noise realization depends only on the seed."""
        spec = NoiseSpec(snr_db=0.0, seed=11)
        np.testing.assert_array_equal(noise_source(spec, 500, FS), noise_source(spec, 500, FS))
        assert not np.array_equal(noise_source(spec, 500, FS), noise_source(NoiseSpec(snr_db=0.0, seed=12), 500, FS))

    def test_large_snr_is_nearly_clean(self, vowel: SyntheticUtterance) -> None:
        """Test that a very high SNR leaves the signal practically untouched."""
        noisy = add_noise(vowel.speech, NoiseSpec(snr_db=200.0))
        np.testing.assert_allclose(noisy.samples, vowel.speech.samples, atol=1e-6)

    def test_zero_energy_input(self) -> None:
        """Test that silence cannot be given an SNR."""
        with pytest.raises(DegradationError):
            add_noise(Waveform(np.zeros(1000), FS), NoiseSpec(snr_db=10.0))

    def test_external_noise_requires_file(self) -> None:
        """Test that external noise needs a noise file."""
        with pytest.raises(ValidationError):
            NoiseSpec(kind=NoiseKind.EXTERNAL, snr_db=5.0)

    def test_external_noise_file(self, temp_dir: Path, vowel: SyntheticUtterance) -> None:
        """Test that a short noise file is tiled to the signal length."""
        path = temp_dir / "babble.wav"
        save_waveform(path, Waveform(0.1 * np.random.default_rng(0).standard_normal(800), FS))
        spec = NoiseSpec(kind=NoiseKind.EXTERNAL, snr_db=5.0, noise_file=path)
        noise = noise_source(spec, 2000, FS)
        assert noise.size == 2000
        assert np.any(noise)
        assert len(add_noise(vowel.speech, spec)) == len(vowel.speech)


class TestReverberation:
    """Test the source-image room model and RIR convolution."""

    def test_reflection_from_t60(self) -> None:
        """Test that longer reverberation means more reflective walls."""
        short = reflection_for_t60(RoomSpec(t60_s=0.2))
        long = reflection_for_t60(RoomSpec(t60_s=0.8))
        assert 0 < short < long < 1
        assert reflection_for_t60(RoomSpec(reflection=0.5)) == 0.5

    def test_unreachable_t60(self) -> None:
        """Test that a T60 too short for the room is rejected."""
        with pytest.raises(DegradationError):
            reflection_for_t60(RoomSpec(t60_s=0.02))

    def test_positions_inside_room(self) -> None:
        """Test that source and microphone must lie inside the room."""
        with pytest.raises(ValidationError):
            RoomSpec(mic_m=(3.5, 1.0, 1.0))

    def test_direct_path(self) -> None:
        """Test that the first tap of the RIR is the direct path."""
        room = RoomSpec(t60_s=0.2)
        rir = simulate_rir(room, FS)
        assert direct_path_delay(rir) == int(round(room.source_mic_distance / room.speed_of_sound * FS))
        assert rir.size == direct_path_delay(rir) + math.ceil(0.2 * FS) + 1

    def test_first_order_images_match_mirrored_sources(self) -> None:
        """Test the direct path and the six single-wall images against hand-placed mirror sources."""
        room = RoomSpec(reflection=0.5, max_order=1, rir_length=4000)
        source = np.array(room.source_m)
        mic = np.array(room.mic_m)
        images = [(source, 1.0)]
        for axis, size in enumerate(room.dimensions_m):
            for wall in (0.0, size):
                mirrored = source.copy()
                mirrored[axis] = 2 * wall - source[axis]
                images.append((mirrored, 0.5))

        expected = np.zeros(4000)
        for position, gain in images:
            distance = float(np.linalg.norm(position - mic))
            expected[int(round(distance / room.speed_of_sound * FS))] += gain / (4 * math.pi * distance)

        rir = simulate_rir(room, FS)
        assert np.flatnonzero(rir).tolist() == [58, 149, 160, 184, 193, 323]
        np.testing.assert_allclose(rir, expected, rtol=1e-12, atol=0.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("t60", [0.3, 0.6])
    def test_measured_t60_matches_target(self, t60: float) -> None:
        """Test that the Schroeder decay of the simulated RIR has roughly the requested T60."""
        rir = simulate_rir(RoomSpec(t60_s=t60), FS)
        assert measure_t60(rir, FS) == pytest.approx(t60, rel=0.25)

    def test_schroeder_curve(self) -> None:
        """Test that the decay curve starts at 0 dB and never rises."""
        decay = schroeder_decay_db(np.exp(-np.arange(500) / 50.0))
        assert decay[0] == 0.0
        assert np.all(np.diff(decay) <= 1e-12)

    def test_measure_t60_of_exponential(self) -> None:
        """Test the T60 of an ideal exponential decay."""
        tau = 0.05
        rir = np.exp(-np.arange(int(FS)) / (tau * FS))
        expected = 3 * np.log(10) * tau
        assert measure_t60(rir, FS) == pytest.approx(expected, rel=1e-3)

    def test_convolution_matches_direct(self) -> None:
        """Test trimming at the direct path and rescaling to the input peak."""
        x = Waveform(np.random.default_rng(0).standard_normal(300), FS)
        rir = np.array([0.0, 0.0, 0.5, 0.25, -0.1])
        expected = np.convolve(x.samples, rir)[2:302]
        expected *= np.max(np.abs(x.samples)) / np.max(np.abs(expected))
        np.testing.assert_allclose(convolve_rir(x, rir).samples, expected, atol=1e-10)

    def test_unit_rir_is_identity(self) -> None:
        """Test that a delayed unit impulse leaves the signal unchanged."""
        x = Waveform(np.sin(np.arange(200) / 7.0), FS)
        np.testing.assert_allclose(convolve_rir(x, np.array([0.0, 0.0, 0.0, 1.0])).samples, x.samples, atol=1e-12)


class TestApplyCondition:
    """Test condition composition."""

    def test_clean_is_identity(self, vowel: SyntheticUtterance) -> None:
        """Test that the clean condition returns the input unchanged."""
        out = apply_condition(vowel.speech, Condition())
        np.testing.assert_array_equal(out.samples, vowel.speech.samples)

    def test_reverb_and_noise(self, vowel: SyntheticUtterance) -> None:
        """Test that a combined condition keeps the length and changes the samples."""
        condition = Condition(name="both", noise=NoiseSpec(snr_db=10.0), room=RoomSpec(t60_s=0.2))
        out = apply_condition(vowel.speech, condition)
        assert len(out) == len(vowel.speech)
        assert not np.allclose(out.samples, vowel.speech.samples)
