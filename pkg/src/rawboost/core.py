"""Domain types, parameter ranges, deterministic random source and sampling.

Every random quantity consumed by the augmentation engine flows through a
:class:`RandomSource`, which wraps a PCG64 generator seeded from a 64-bit
master seed plus a per-utterance key. Draw order is part of the public
contract: replaying the same source replays every sampled configuration
bit-exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigurationError
from .filters import FirFilter, NotchSpec, design_multiband_fir

__all__ = [
    "Waveform",
    "RandomSource",
    "derive_utterance_rng",
    "db_to_linear",
    "ParameterRanges",
    "ConvolutiveOrder",
    "ConvolutiveConfig",
    "ImpulsiveConfig",
    "StationaryConfig",
    "sample_convolutive_config",
    "sample_impulsive_config",
    "sample_stationary_config",
]

_U64_MAX = 2**64 - 1


@dataclass(frozen=True, eq=False)
class Waveform:
    """A mono sample sequence with its sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ConfigurationError("waveform must be a non-empty 1-D sample sequence")
        if self.sample_rate <= 0:
            raise ConfigurationError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Waveform):
            return NotImplemented
        return self.sample_rate == other.sample_rate and np.array_equal(
            self.samples, other.samples
        )


class RandomSource:
    """Deterministic random stream owned by a single utterance.

    Wraps ``numpy.random.Generator(PCG64)``. Vectorised draws consume the
    underlying bit stream exactly as the equivalent sequence of scalar
    draws, so callers may batch for speed without changing results.
    The ``draw_count`` property reports how many values have been drawn;
    the full generator state can be captured and restored for bit-exact
    replay.
    """

    def __init__(self, bit_generator: np.random.PCG64):
        self._gen = np.random.Generator(bit_generator)
        self._draws = 0

    @property
    def draw_count(self) -> int:
        return self._draws

    def uniform(self, low: float, high: float, size: Optional[int] = None):
        """Uniform real draw(s) on [low, high]."""
        self._draws += 1 if size is None else int(size)
        return self._gen.uniform(low, high, size=size)

    def integers(self, low: int, high: int, size: Optional[int] = None):
        """Uniform integer draw(s) on the inclusive range [low, high]."""
        self._draws += 1 if size is None else int(size)
        return self._gen.integers(low, high, size=size, endpoint=True)

    def normal(self, size: Optional[int] = None):
        """Standard normal draw(s)."""
        self._draws += 1 if size is None else int(size)
        return self._gen.standard_normal(size=size)

    def sign(self, size: Optional[int] = None):
        """Fair sign draw(s), +1.0 or -1.0 with equal probability."""
        self._draws += 1 if size is None else int(size)
        u = self._gen.random(size=size)
        if size is None:
            return 1.0 if u < 0.5 else -1.0
        return np.where(u < 0.5, 1.0, -1.0)

    def choose_positions(self, n: int, k: int) -> np.ndarray:
        """k distinct positions from range(n), uniformly without replacement, sorted."""
        self._draws += int(k)
        if k == 0:
            return np.empty(0, dtype=np.int64)
        return np.sort(self._gen.choice(n, size=k, replace=False))

    def get_state(self) -> dict:
        """JSON-serialisable snapshot of the generator state."""
        st = self._gen.bit_generator.state
        return {
            "state": int(st["state"]["state"]),
            "inc": int(st["state"]["inc"]),
            "has_uint32": int(st["has_uint32"]),
            "uinteger": int(st["uinteger"]),
            "draws": self._draws,
        }

    def set_state(self, snapshot: Mapping) -> None:
        self._gen.bit_generator.state = {
            "bit_generator": "PCG64",
            "state": {"state": int(snapshot["state"]), "inc": int(snapshot["inc"])},
            "has_uint32": int(snapshot["has_uint32"]),
            "uinteger": int(snapshot["uinteger"]),
        }
        self._draws = int(snapshot.get("draws", 0))


def derive_utterance_rng(master_seed: int, utterance_key) -> RandomSource:
    """Derive the per-utterance random source from (master seed, key).

    The key (a path-like string or bytes) is hashed with SHA-256 and folded
    into the seed sequence, so distinct keys yield statistically independent
    streams and batch results do not depend on processing order.
    """
    if not 0 <= int(master_seed) <= _U64_MAX:
        raise ConfigurationError(f"master seed must be a 64-bit unsigned integer, got {master_seed}")
    if isinstance(utterance_key, str):
        key_bytes = utterance_key.encode("utf-8")
    else:
        key_bytes = bytes(utterance_key)
    digest = hashlib.sha256(key_bytes).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    seq = np.random.SeedSequence([int(master_seed)] + words)
    return RandomSource(np.random.PCG64(seq))


def db_to_linear(g_db: float) -> float:
    """Convert a decibel gain to a linear amplitude factor, 10^(dB/20)."""
    g_db = float(g_db)
    if not np.isfinite(g_db):
        raise ConfigurationError(f"gain in dB must be finite, got {g_db}")
    return float(10.0 ** (g_db / 20.0))


def _check_range(name: str, value, *, integer: bool = False) -> tuple:
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a [min, max] pair, got {value!r}") from None
    if integer:
        if int(lo) != lo or int(hi) != hi:
            raise ConfigurationError(f"{name} must contain integers, got {value!r}")
        lo, hi = int(lo), int(hi)
    else:
        lo, hi = float(lo), float(hi)
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ConfigurationError(f"{name} must be finite, got {value!r}")
    if lo > hi:
        raise ConfigurationError(f"{name} is out of order: min {lo} > max {hi}")
    return (lo, hi)


@dataclass(frozen=True)
class ParameterRanges:
    """Sampling ranges for the three noise techniques.

    Defaults reproduce the reference operating point for 16 kHz speech:
    five notch filters of 11..101 taps with centers in [20, 8000] Hz and
    widths in [100, 1000] Hz, five Hammerstein orders with 0 dB first-order
    gain and higher orders in [-20, -5] dB, up to 10% impulsive samples at
    gain 2, and stationary noise at 10..40 dB SNR.
    """

    n_notch: int = 5
    n_fir_range: tuple = (10, 100)
    n_f: int = 5
    f_c_range: tuple = (20.0, 8000.0)
    delta_f_range: tuple = (100.0, 1000.0)
    g_cn_1_range: tuple = (0.0, 0.0)
    g_cn_higher_range: tuple = (-20.0, -5.0)
    p_rel_range: tuple = (0.0, 10.0)
    g_sd: float = 2.0
    snr_range: tuple = (10.0, 40.0)

    def __post_init__(self):
        if int(self.n_notch) != self.n_notch or self.n_notch < 0:
            raise ConfigurationError(f"n_notch must be a non-negative integer, got {self.n_notch}")
        if int(self.n_f) != self.n_f or self.n_f < 1:
            raise ConfigurationError(f"n_f must be a positive integer, got {self.n_f}")
        if not (float(self.g_sd) > 0):
            raise ConfigurationError(f"g_sd must be positive, got {self.g_sd}")
        object.__setattr__(self, "n_notch", int(self.n_notch))
        object.__setattr__(self, "n_f", int(self.n_f))
        object.__setattr__(self, "g_sd", float(self.g_sd))
        n_fir = _check_range("n_fir_range", self.n_fir_range, integer=True)
        if n_fir[0] < 2:
            raise ConfigurationError(f"n_fir_range minimum must be >= 2 (3 taps), got {n_fir[0]}")
        object.__setattr__(self, "n_fir_range", n_fir)
        f_c = _check_range("f_c_range", self.f_c_range)
        if f_c[0] < 0:
            raise ConfigurationError(f"f_c_range must be non-negative, got {f_c}")
        object.__setattr__(self, "f_c_range", f_c)
        delta_f = _check_range("delta_f_range", self.delta_f_range)
        if delta_f[0] < 0:
            raise ConfigurationError(f"delta_f_range must be non-negative, got {delta_f}")
        object.__setattr__(self, "delta_f_range", delta_f)
        object.__setattr__(self, "g_cn_1_range", _check_range("g_cn_1_range", self.g_cn_1_range))
        object.__setattr__(self, "g_cn_higher_range", _check_range("g_cn_higher_range", self.g_cn_higher_range))
        p_rel = _check_range("p_rel_range", self.p_rel_range)
        if p_rel[0] < 0 or p_rel[1] > 100:
            raise ConfigurationError(f"p_rel_range is in percent and must lie in [0, 100], got {p_rel}")
        object.__setattr__(self, "p_rel_range", p_rel)
        object.__setattr__(self, "snr_range", _check_range("snr_range", self.snr_range))

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, mapping: Optional[Mapping]) -> "ParameterRanges":
        """Build ranges from a key/value mapping; unspecified keys keep defaults."""
        if mapping is None:
            return cls()
        known = set(cls.field_names())
        for key in mapping:
            if key not in known:
                raise ConfigurationError(f"unknown parameter range key: {key!r}")
        kwargs = {k: (tuple(v) if isinstance(v, (list, tuple)) else v) for k, v in mapping.items()}
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ParameterRanges":
        """Load ranges from a JSON configuration file."""
        import json

        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"invalid configuration file {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"configuration file {path} must hold a JSON object")
        return cls.from_mapping(data)

    def validate_for_sample_rate(self, sample_rate: int) -> None:
        """Check that Hz-denominated ranges fit under the Nyquist frequency."""
        nyquist = sample_rate / 2.0
        if self.f_c_range[1] > nyquist:
            raise ConfigurationError(
                f"f_c_range maximum {self.f_c_range[1]} Hz exceeds Nyquist {nyquist} Hz"
            )


@dataclass(frozen=True)
class ConvolutiveOrder:
    """One Hammerstein order: the sampled notch specs, its gain and filter."""

    notches: tuple
    gain_db: float
    fir: FirFilter

    @property
    def gain(self) -> float:
        # -inf dB denotes a fully muted order
        if self.gain_db == float("-inf"):
            return 0.0
        return db_to_linear(self.gain_db)


@dataclass(frozen=True)
class ConvolutiveConfig:
    """Fully-sampled parameters for one convolutive noise application."""

    orders: tuple

    def __post_init__(self):
        if len(self.orders) < 1:
            raise ConfigurationError("convolutive config needs at least one order")


@dataclass(frozen=True)
class ImpulsiveConfig:
    """Fully-sampled parameters for one impulsive noise application."""

    p_rel: float
    g_sd: float

    def __post_init__(self):
        if not 0.0 <= self.p_rel <= 1.0:
            raise ConfigurationError(f"p_rel must lie in [0, 1], got {self.p_rel}")
        if not self.g_sd > 0:
            raise ConfigurationError(f"g_sd must be positive, got {self.g_sd}")


@dataclass(frozen=True)
class StationaryConfig:
    """Fully-sampled parameters for one stationary noise application."""

    snr_db: float
    notches: tuple
    coloring_filter: FirFilter

    def __post_init__(self):
        if len(self.coloring_filter) < 1:
            raise ConfigurationError("coloring filter must be non-empty")


def _sample_notches(ranges: ParameterRanges, rng: RandomSource) -> tuple:
    """Draw the notch specs for one multi-band filter.

    Draw order per notch is frozen: center frequency, stop-band width,
    coefficient count (taps = drawn tap budget + 1).
    """
    notches = []
    for _ in range(ranges.n_notch):
        f_c = float(rng.uniform(*ranges.f_c_range))
        delta_f = float(rng.uniform(*ranges.delta_f_range))
        n_fir = int(rng.integers(*ranges.n_fir_range))
        notches.append(NotchSpec(f_c=f_c, delta_f=delta_f, n_taps=n_fir + 1))
    return tuple(notches)


def build_convolutive_order(notches, gain_db: float, sample_rate: int) -> ConvolutiveOrder:
    fir = design_multiband_fir(list(notches), sample_rate)
    return ConvolutiveOrder(notches=tuple(notches), gain_db=float(gain_db), fir=fir)


def sample_convolutive_config(ranges: ParameterRanges, sample_rate: int, rng: RandomSource) -> ConvolutiveConfig:
    """Sample one convolutive noise configuration.

    For each order j = 1..n_f an independent multi-band filter is drawn,
    then its gain: order 1 from g_cn_1_range, the rest from
    g_cn_higher_range.
    """
    if sample_rate <= 0:
        raise ConfigurationError(f"sample rate must be positive, got {sample_rate}")
    ranges.validate_for_sample_rate(sample_rate)
    orders = []
    for j in range(1, ranges.n_f + 1):
        notches = _sample_notches(ranges, rng)
        gain_range = ranges.g_cn_1_range if j == 1 else ranges.g_cn_higher_range
        gain_db = float(rng.uniform(*gain_range))
        orders.append(build_convolutive_order(notches, gain_db, sample_rate))
    return ConvolutiveConfig(orders=tuple(orders))


def sample_impulsive_config(ranges: ParameterRanges, rng: RandomSource) -> ImpulsiveConfig:
    """Sample one impulsive noise configuration (p_rel percent -> fraction)."""
    p_rel_percent = float(rng.uniform(*ranges.p_rel_range))
    return ImpulsiveConfig(p_rel=p_rel_percent / 100.0, g_sd=ranges.g_sd)


def sample_stationary_config(ranges: ParameterRanges, sample_rate: int, rng: RandomSource) -> StationaryConfig:
    """Sample one stationary noise configuration.

    Draw order is frozen: target SNR first, then the coloring filter's
    notch specs, drawn exactly as one order of the convolutive technique.
    """
    if sample_rate <= 0:
        raise ConfigurationError(f"sample rate must be positive, got {sample_rate}")
    ranges.validate_for_sample_rate(sample_rate)
    snr_db = float(rng.uniform(*ranges.snr_range))
    notches = _sample_notches(ranges, rng)
    fir = design_multiband_fir(list(notches), sample_rate)
    return StationaryConfig(snr_db=snr_db, notches=notches, coloring_filter=fir)
