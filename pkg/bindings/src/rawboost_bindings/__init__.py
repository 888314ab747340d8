"""In-process binding of the rawboost pipeline for ML dataloaders.

Exposes exactly two operations plus version metadata:

* :func:`augment_array` runs a technique chain on a raw float buffer and
  returns a new float64 array, numerically identical to calling the core
  library directly. No files are touched and the input buffer is never
  mutated, so dataloader workers keep full float precision (unlike the
  file path, which quantizes to 16-bit PCM).
* :func:`load_ranges` validates a parameter-range mapping into the handle
  accepted by ``augment_array``.

The binding holds no global mutable state: every call derives its own
random stream from (seed, key), so concurrent calls from multiple
interpreter threads are safe, and numpy releases the GIL inside the
heavy kernels.
"""

from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

import rawboost
from rawboost import (
    ChainParseError,
    ConfigurationError,
    DegenerateFilterError,
    DegenerateInputError,
    DegenerateSpecError,
    ParameterRanges,
    RawboostError,
    Waveform,
    derive_utterance_rng,
    parse_chain,
    run_chain,
)
from rawboost.estimators import check_waveform

__version__ = "0.1.0"

CORE_VERSION = rawboost.__version__

__all__ = [
    "augment_array",
    "load_ranges",
    "core_version",
    "CORE_VERSION",
    "__version__",
    "RawboostError",
    "ChainParseError",
    "ConfigurationError",
    "DegenerateSpecError",
    "DegenerateInputError",
    "DegenerateFilterError",
]


def core_version() -> str:
    """Version of the underlying core library."""
    return CORE_VERSION


def load_ranges(mapping: Optional[Mapping] = None) -> ParameterRanges:
    """Validate a parameter-range mapping; unspecified keys take defaults.

    Raises ConfigurationError naming the offending key or value.
    """
    if isinstance(mapping, ParameterRanges):
        return mapping
    return ParameterRanges.from_mapping(mapping)


def augment_array(
    samples,
    sample_rate: int,
    chain: str,
    seed: int,
    key,
    ranges: Optional[Mapping] = None,
) -> np.ndarray:
    """Augment one utterance held in memory.

    Args:
        samples: finite float samples in [-1, 1], any 1-D sequence.
        sample_rate: sample rate in Hz.
        chain: chain string, e.g. "1+2" or "1|2"; "" is the identity.
        seed: 64-bit master seed.
        key: per-utterance key (string or bytes), e.g. the utterance path.
        ranges: optional parameter-range mapping or handle.

    Returns:
        A new float64 array of the same length; the input is not mutated.
    """
    spec = parse_chain(chain)
    handle = load_ranges(ranges)
    arr = check_waveform(samples, name="samples")
    rng = derive_utterance_rng(seed, key)
    wf = Waveform(samples=arr, sample_rate=sample_rate)
    out, _ = run_chain(wf, spec, rng, handle, utterance=str(key), seed=seed)
    return np.array(out.samples, dtype=np.float64, copy=True)
