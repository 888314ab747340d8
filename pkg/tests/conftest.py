import numpy as np
import pytest

from rawboost import Waveform, derive_utterance_rng


@pytest.fixture
def rng():
    return derive_utterance_rng(42, "fixture.wav")


def make_speechlike(length: int, seed: int, sample_rate: int = 16000, peak: float = 0.8) -> Waveform:
    """A deterministic speech-shaped test signal: a few tones plus noise."""
    g = np.random.default_rng(seed)
    t = np.arange(length) / sample_rate
    x = np.zeros(length)
    for _ in range(4):
        x += g.uniform(0.1, 1.0) * np.sin(2 * np.pi * g.uniform(80, 3000) * t + g.uniform(0, 2 * np.pi))
    x += 0.1 * g.standard_normal(length)
    x *= peak / np.max(np.abs(x))
    return Waveform(samples=x, sample_rate=sample_rate)
