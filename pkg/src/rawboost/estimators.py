"""Scikit-learn style transformers wrapping the augmentation pipeline.

These estimators are stateless: ``fit`` only validates parameters. Each
utterance passed to ``transform`` is augmented with a freshly sampled
configuration drawn from a per-utterance stream derived from ``seed`` and
the utterance key (its position index by default), so results do not
depend on batch composition or ordering and are reproducible across runs.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .core import ParameterRanges, Waveform, derive_utterance_rng
from .errors import ConfigurationError
from .pipeline import parse_chain, run_chain

__all__ = [
    "check_waveform",
    "RawBoost",
    "ConvolutiveNoise",
    "ImpulsiveNoise",
    "StationaryNoise",
]


def check_waveform(x, name: str = "waveform") -> np.ndarray:
    """Validate one utterance: 1-D, non-empty, finite, within [-1, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ConfigurationError(f"{name} must be a non-empty 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} contains non-finite samples")
    peak = float(np.max(np.abs(arr)))
    if peak > 1.0:
        raise ConfigurationError(f"{name} exceeds the [-1, 1] ingest range (peak {peak:.6g})")
    return arr


def _resolve_ranges(ranges) -> ParameterRanges:
    if ranges is None:
        return ParameterRanges()
    if isinstance(ranges, ParameterRanges):
        return ranges
    return ParameterRanges.from_mapping(ranges)


class RawBoost(BaseEstimator, TransformerMixin):
    """Waveform augmentation transformer for a technique chain.

    Parameters
    ----------
    chain:
        Chain string, e.g. "1", "1+2" (series) or "1|2" (parallel).
    seed:
        64-bit master seed for per-utterance stream derivation.
    sample_rate:
        Sample rate in Hz the utterances are assumed to carry.
    ranges:
        Parameter ranges (ParameterRanges, mapping, or None for defaults).
    """

    def __init__(self, chain: str = "1+2", seed: int = 0, sample_rate: int = 16000, ranges=None):
        self.chain = chain
        self.seed = seed
        self.sample_rate = sample_rate
        self.ranges = ranges

    def fit(self, X=None, y=None):
        """Validate parameters; this transformer learns nothing from data."""
        parse_chain(self.chain)
        _resolve_ranges(self.ranges)
        return self

    def _augment_one(self, samples: np.ndarray, key: str) -> np.ndarray:
        spec = parse_chain(self.chain)
        ranges = _resolve_ranges(self.ranges)
        rng = derive_utterance_rng(self.seed, key)
        wf = Waveform(samples=check_waveform(samples), sample_rate=self.sample_rate)
        out, _ = run_chain(wf, spec, rng, ranges, utterance=key, seed=self.seed)
        return out.samples

    def transform(self, X, keys: Optional[Sequence[str]] = None):
        """Augment utterances.

        Accepts a single 1-D waveform, a list of 1-D waveforms (possibly of
        different lengths), or a 2-D array with one utterance per row, and
        returns the same shape. ``keys`` overrides the per-utterance stream
        keys (defaults to the decimal position index).
        """
        single = isinstance(X, np.ndarray) and X.ndim == 1
        if single:
            key = keys[0] if keys else "0"
            return self._augment_one(X, key)
        rows = list(X)
        if keys is not None and len(keys) != len(rows):
            raise ConfigurationError(f"got {len(keys)} keys for {len(rows)} utterances")
        out = [
            self._augment_one(row, keys[i] if keys is not None else str(i))
            for i, row in enumerate(rows)
        ]
        if isinstance(X, np.ndarray):
            return np.stack(out)
        return out


class ConvolutiveNoise(RawBoost):
    """Linear and non-linear convolutive noise (technique 1)."""

    def __init__(self, seed: int = 0, sample_rate: int = 16000, ranges=None):
        super().__init__(chain="1", seed=seed, sample_rate=sample_rate, ranges=ranges)


class ImpulsiveNoise(RawBoost):
    """Impulsive signal-dependent additive noise (technique 2)."""

    def __init__(self, seed: int = 0, sample_rate: int = 16000, ranges=None):
        super().__init__(chain="2", seed=seed, sample_rate=sample_rate, ranges=ranges)


class StationaryNoise(RawBoost):
    """Stationary signal-independent additive noise (technique 3)."""

    def __init__(self, seed: int = 0, sample_rate: int = 16000, ranges=None):
        super().__init__(chain="3", seed=seed, sample_rate=sample_rate, ranges=ranges)
