"""Shared pytest fixtures for tests."""

import shutil
import tempfile
from collections.abc import Iterator
from pathlib import Path
from typing import Any

import pytest
import yaml

from gci_toolkit.evaluation import ReferenceCycles, build_cycles
from gci_toolkit.file_manager import save_waveform
from gci_toolkit.signals import PitchPrior
from gci_toolkit.synthetic import SyntheticUtterance, impulse_train_vowel, synthetic_vowel


@pytest.fixture
def temp_dir() -> Iterator[Path]:
    """Create a temporary directory for tests."""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture
def vowel() -> SyntheticUtterance:
    """One second of a 100 Hz synthetic vowel with its EGG and true GCIs."""
    return synthetic_vowel(f0_hz=100.0, duration_s=1.0, seed=0)


@pytest.fixture
def high_vowel() -> SyntheticUtterance:
    """One second of a 220 Hz synthetic vowel."""
    return synthetic_vowel(f0_hz=220.0, duration_s=1.0, seed=3)


@pytest.fixture
def impulse_vowel() -> SyntheticUtterance:
    """Vowel excited by a unit impulse train, no jitter."""
    return impulse_train_vowel(f0_hz=120.0, duration_s=1.0, seed=1)


@pytest.fixture
def vowel_prior(vowel: SyntheticUtterance) -> PitchPrior:
    """Pitch prior matching the 100 Hz vowel."""
    return vowel.prior


@pytest.fixture
def true_cycles(vowel: SyntheticUtterance) -> ReferenceCycles:
    """Reference cycles built from the true GCIs of the vowel."""
    return build_cycles(vowel.gcis)


def write_pair(directory: Path, utterance: SyntheticUtterance) -> tuple[Path, Path]:
    """Write an utterance as speech/<name>.wav and egg/<name>.wav."""
    speech_path = directory / "speech" / f"{utterance.name}.wav"
    egg_path = directory / "egg" / f"{utterance.name}.wav"
    save_waveform(speech_path, utterance.speech)
    save_waveform(egg_path, utterance.egg)
    return speech_path, egg_path


@pytest.fixture
def recordings_dir(temp_dir: Path) -> Path:
    """Two short synthetic recordings from two speakers, written as 16-bit WAV files."""
    for f0, seed in ((100.0, 0), (160.0, 1)):
        write_pair(temp_dir, synthetic_vowel(f0_hz=f0, duration_s=0.6, seed=seed, name=f"utt_f{int(f0)}"))
    return temp_dir


@pytest.fixture
def config_data() -> dict[str, Any]:
    """Experiment configuration pointing at the files of ``recordings_dir``."""
    return {
        "manifest": {
            "entries": [
                {"speech": "speech/utt_f100.wav", "egg": "egg/utt_f100.wav", "speaker": "low"},
                {"speech": "speech/utt_f160.wav", "egg": "egg/utt_f160.wav", "speaker": "high"},
            ],
            "speaker_f0_hz": {"low": 100.0, "high": 160.0},
            "sample_rate_hz": 16000,
        },
        "methods": ["sedreams", "zfr"],
        "conditions": [
            {"name": "clean"},
            {"name": "white_10dB", "noise": {"kind": "white_gaussian", "snr_db": 10.0, "seed": 1}},
        ],
    }


@pytest.fixture
def config_file(recordings_dir: Path, config_data: dict[str, Any]) -> Path:
    """Configuration YAML written next to the recordings."""
    path = recordings_dir / "config.yml"
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(config_data, f)
    return path
