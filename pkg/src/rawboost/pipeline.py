"""Series/parallel composition of techniques, normalization and provenance.

A chain is written as technique digits joined by "+" (series) or "|"
(parallel), e.g. "1+2", "1|2", "3". Configs are sampled in chain order
from the single per-utterance RandomSource, and each kernel consumes the
source immediately after its config, so extending a chain never perturbs
the draws of earlier techniques.

Every run produces a ProvenanceRecord holding the sampled parameters plus
generator state snapshots, sufficient to replay the output bit-exactly
without re-running the samplers.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum
from typing import List, Optional, Tuple

import numpy as np

from .core import (
    ConvolutiveConfig,
    ImpulsiveConfig,
    ParameterRanges,
    RandomSource,
    StationaryConfig,
    Waveform,
    build_convolutive_order,
    sample_convolutive_config,
    sample_impulsive_config,
    sample_stationary_config,
)
from .distortions import apply_convolutive, apply_impulsive, apply_stationary
from .errors import ChainParseError, ReplayError
from .filters import NotchSpec, design_multiband_fir

__all__ = [
    "Technique",
    "ChainSpec",
    "parse_chain",
    "normalize",
    "TechniqueProvenance",
    "ProvenanceRecord",
    "TechniqueTrace",
    "run_series",
    "run_parallel",
    "run_chain",
    "replay",
]

SERIES = "series"
PARALLEL = "parallel"


class Technique(IntEnum):
    CONVOLUTIVE = 1
    IMPULSIVE = 2
    STATIONARY = 3


@dataclass(frozen=True)
class ChainSpec:
    """Ordered techniques plus the combination mode."""

    techniques: tuple
    mode: str = SERIES

    def __post_init__(self):
        if self.mode not in (SERIES, PARALLEL):
            raise ChainParseError(f"unknown combination mode: {self.mode!r}")
        object.__setattr__(self, "techniques", tuple(Technique(t) for t in self.techniques))

    def __str__(self) -> str:
        sep = "+" if self.mode == SERIES else "|"
        return sep.join(str(int(t)) for t in self.techniques)


def parse_chain(text: str) -> ChainSpec:
    """Parse a chain string; the empty string is the identity chain."""
    s = text.strip()
    if not s:
        return ChainSpec(techniques=(), mode=SERIES)
    if "+" in s and "|" in s:
        raise ChainParseError(f"chain {text!r} mixes series '+' and parallel '|'")
    if "|" in s:
        mode, tokens = PARALLEL, s.split("|")
    else:
        mode, tokens = SERIES, s.split("+")
    techniques = []
    for tok in tokens:
        tok = tok.strip()
        if tok not in ("1", "2", "3"):
            raise ChainParseError(f"chain {text!r} has invalid technique {tok!r}; expected 1, 2 or 3")
        techniques.append(Technique(int(tok)))
    return ChainSpec(techniques=tuple(techniques), mode=mode)


def normalize(samples: np.ndarray) -> np.ndarray:
    """Rescale to unit peak only when the peak exceeds 1; idempotent."""
    y = np.asarray(samples, dtype=np.float64)
    if y.size == 0:
        return y
    peak = float(np.max(np.abs(y)))
    if peak > 1.0:
        return y / peak
    return y


@dataclass(frozen=True)
class TechniqueProvenance:
    """Everything sampled for one technique application, plus replay anchors."""

    technique: int
    params: dict
    rng_state_start: dict
    rng_state_kernel: dict
    draws_config: int
    draws_kernel: int


@dataclass(frozen=True)
class ProvenanceRecord:
    """Complete description of one utterance augmentation."""

    utterance: str
    seed: int
    chain: str
    sample_rate: int
    num_samples: int
    techniques: tuple
    input_path: str = ""
    output_path: str = ""

    def to_json_obj(self) -> dict:
        return {
            "utterance": self.utterance,
            "seed": self.seed,
            "chain": self.chain,
            "sample_rate": self.sample_rate,
            "num_samples": self.num_samples,
            "input": self.input_path,
            "output": self.output_path,
            "techniques": [
                {
                    "technique": t.technique,
                    "params": t.params,
                    "rng_state_start": t.rng_state_start,
                    "rng_state_kernel": t.rng_state_kernel,
                    "draws_config": t.draws_config,
                    "draws_kernel": t.draws_kernel,
                }
                for t in self.techniques
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ProvenanceRecord":
        return cls(
            utterance=obj["utterance"],
            seed=int(obj["seed"]),
            chain=obj["chain"],
            sample_rate=int(obj["sample_rate"]),
            num_samples=int(obj["num_samples"]),
            input_path=obj.get("input", ""),
            output_path=obj.get("output", ""),
            techniques=tuple(
                TechniqueProvenance(
                    technique=int(t["technique"]),
                    params=t["params"],
                    rng_state_start=t["rng_state_start"],
                    rng_state_kernel=t["rng_state_kernel"],
                    draws_config=int(t["draws_config"]),
                    draws_kernel=int(t["draws_kernel"]),
                )
                for t in obj["techniques"]
            ),
        )


@dataclass(frozen=True)
class TechniqueTrace:
    """Input/output pair of one technique application during (re)execution."""

    technique: int
    params: dict
    input_samples: np.ndarray
    output_samples: np.ndarray


def _notch_params(notches) -> list:
    return [{"f_c": n.f_c, "delta_f": n.delta_f, "n_taps": n.n_taps} for n in notches]


def _notch_specs(params) -> list:
    return [NotchSpec(f_c=p["f_c"], delta_f=p["delta_f"], n_taps=p["n_taps"]) for p in params]


def _config_params(technique: Technique, cfg) -> dict:
    if technique == Technique.CONVOLUTIVE:
        return {
            "orders": [
                {"gain_db": o.gain_db, "notches": _notch_params(o.notches)} for o in cfg.orders
            ]
        }
    if technique == Technique.IMPULSIVE:
        return {"p_rel": cfg.p_rel, "g_sd": cfg.g_sd}
    return {"snr_db": cfg.snr_db, "notches": _notch_params(cfg.notches)}


def _config_from_params(technique: Technique, params: dict, sample_rate: int):
    if technique == Technique.CONVOLUTIVE:
        orders = tuple(
            build_convolutive_order(_notch_specs(o["notches"]), o["gain_db"], sample_rate)
            for o in params["orders"]
        )
        return ConvolutiveConfig(orders=orders)
    if technique == Technique.IMPULSIVE:
        return ImpulsiveConfig(p_rel=params["p_rel"], g_sd=params["g_sd"])
    notches = tuple(_notch_specs(params["notches"]))
    fir = design_multiband_fir(list(notches), sample_rate)
    return StationaryConfig(snr_db=params["snr_db"], notches=notches, coloring_filter=fir)


def _sample_config(technique: Technique, ranges: ParameterRanges, sample_rate: int, rng: RandomSource):
    if technique == Technique.CONVOLUTIVE:
        return sample_convolutive_config(ranges, sample_rate, rng)
    if technique == Technique.IMPULSIVE:
        return sample_impulsive_config(ranges, rng)
    return sample_stationary_config(ranges, sample_rate, rng)


def _apply_config(technique: Technique, x: Waveform, cfg, rng: RandomSource) -> Waveform:
    if technique == Technique.CONVOLUTIVE:
        return apply_convolutive(x, cfg)
    if technique == Technique.IMPULSIVE:
        return apply_impulsive(x, cfg, rng)
    return apply_stationary(x, cfg, rng)


def _run_technique(technique: Technique, x: Waveform, ranges, rng) -> Tuple[Waveform, TechniqueProvenance]:
    state_start = rng.get_state()
    cfg = _sample_config(technique, ranges, x.sample_rate, rng)
    state_kernel = rng.get_state()
    y = _apply_config(technique, x, cfg, rng)
    return y, TechniqueProvenance(
        technique=int(technique),
        params=_config_params(technique, cfg),
        rng_state_start=state_start,
        rng_state_kernel=state_kernel,
        draws_config=state_kernel["draws"] - state_start["draws"],
        draws_kernel=rng.draw_count - state_kernel["draws"],
    )


def _finish(x: Waveform, chain: ChainSpec, identity, techniques, out: np.ndarray) -> Tuple[Waveform, ProvenanceRecord]:
    utterance, seed = identity
    final = Waveform(samples=normalize(out), sample_rate=x.sample_rate)
    record = ProvenanceRecord(
        utterance=utterance,
        seed=int(seed),
        chain=str(chain),
        sample_rate=x.sample_rate,
        num_samples=len(x),
        techniques=tuple(techniques),
    )
    return final, record


def run_series(
    x: Waveform,
    chain: ChainSpec,
    rng: RandomSource,
    ranges: Optional[ParameterRanges] = None,
    *,
    utterance: str = "",
    seed: int = 0,
):
    """Feed each technique's output into the next, then normalize once."""
    if chain.mode != SERIES:
        raise ChainParseError(f"run_series called with a {chain.mode} chain")
    ranges = ranges if ranges is not None else ParameterRanges()
    current = x
    techniques = []
    for tech in chain.techniques:
        current, prov = _run_technique(tech, current, ranges, rng)
        techniques.append(prov)
    return _finish(x, chain, (utterance, seed), techniques, current.samples)


def run_parallel(
    x: Waveform,
    chain: ChainSpec,
    rng: RandomSource,
    ranges: Optional[ParameterRanges] = None,
    *,
    utterance: str = "",
    seed: int = 0,
):
    """Apply each technique to the clean input and sum the distortion residuals."""
    if chain.mode != PARALLEL:
        raise ChainParseError(f"run_parallel called with a {chain.mode} chain")
    ranges = ranges if ranges is not None else ParameterRanges()
    techniques = []
    acc: Optional[np.ndarray] = None
    for tech in chain.techniques:
        y, prov = _run_technique(tech, x, ranges, rng)
        techniques.append(prov)
        if acc is None:
            acc = y.samples
        else:
            acc = acc + (y.samples - x.samples)
    if acc is None:
        acc = x.samples
    return _finish(x, chain, (utterance, seed), techniques, acc)


def run_chain(
    x: Waveform,
    chain: ChainSpec,
    rng: RandomSource,
    ranges: Optional[ParameterRanges] = None,
    *,
    utterance: str = "",
    seed: int = 0,
):
    """Run a chain in its own mode (single-element chains behave identically)."""
    if chain.mode == PARALLEL and len(chain.techniques) > 1:
        return run_parallel(x, chain, rng, ranges, utterance=utterance, seed=seed)
    series_chain = ChainSpec(techniques=chain.techniques, mode=SERIES)
    out, record = run_series(x, series_chain, rng, ranges, utterance=utterance, seed=seed)
    return out, replace(record, chain=str(chain))


def replay(record: ProvenanceRecord, x: Waveform) -> Tuple[Waveform, List[TechniqueTrace]]:
    """Re-execute a record with stored parameters, skipping the samplers.

    Kernel randomness is regenerated from the recorded generator state, so
    the output matches the original run bit-exactly.
    """
    if len(x) != record.num_samples:
        raise ReplayError(
            f"input has {len(x)} samples but the record expects {record.num_samples}"
        )
    if x.sample_rate != record.sample_rate:
        raise ReplayError(
            f"input sample rate {x.sample_rate} differs from recorded {record.sample_rate}"
        )
    chain = parse_chain(record.chain)
    if len(chain.techniques) != len(record.techniques):
        raise ReplayError("recorded technique list does not match the chain string")
    rng = RandomSource(np.random.PCG64())
    traces: List[TechniqueTrace] = []
    parallel = chain.mode == PARALLEL and len(chain.techniques) > 1
    current = x
    acc: Optional[np.ndarray] = None
    for tech, prov in zip(chain.techniques, record.techniques):
        if int(tech) != prov.technique:
            raise ReplayError("technique order mismatch between chain and record")
        cfg = _config_from_params(tech, prov.params, record.sample_rate)
        rng.set_state(prov.rng_state_kernel)
        source = current if not parallel else x
        y = _apply_config(tech, source, cfg, rng)
        consumed = rng.draw_count - prov.rng_state_kernel["draws"]
        if consumed != prov.draws_kernel:
            raise ReplayError(
                f"technique {prov.technique} consumed {consumed} draws on replay, "
                f"recorded {prov.draws_kernel}"
            )
        traces.append(
            TechniqueTrace(
                technique=prov.technique,
                params=prov.params,
                input_samples=source.samples,
                output_samples=y.samples,
            )
        )
        if parallel:
            acc = y.samples if acc is None else acc + (y.samples - x.samples)
        else:
            current = y
    out = acc if parallel else current.samples
    if not record.techniques:
        out = x.samples
    return Waveform(samples=normalize(out), sample_rate=x.sample_rate), traces
