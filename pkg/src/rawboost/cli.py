"""Batch command-line front end: augment, verify and design-filter."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path, PurePosixPath
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .audio_io import (
    read_manifest,
    read_provenance,
    read_wav,
    wav_bytes,
    write_provenance,
    write_wav,
)
from .core import ParameterRanges, derive_utterance_rng
from .errors import RawboostError
from .filters import (
    DESIGN_GRID_POINTS,
    NotchSpec,
    design_multiband_fir,
    design_notch_fir,
    frequency_response,
    write_response_csv,
)
from .pipeline import ProvenanceRecord, Technique, parse_chain, replay, run_chain

SEED_ENV_VAR = "RAWBOOST_SEED"

# Replay of a recorded notch must show essentially the full designed null
# at its center frequency; -60 dB below the passband median leaves two
# orders of magnitude of slack over the observed worst case.
NOTCH_CHECK_DB = -60.0
SNR_CHECK_DB = 0.01


def _output_rel(rel: str, override: Optional[str], chain_str: str) -> str:
    if override:
        return override
    p = PurePosixPath(rel)
    return str(p.with_name(f"{p.stem}_{chain_str}{p.suffix}"))


def _augment_one(rel, override, input_dir, output_dir, chain_str, seed, ranges):
    """Process one utterance; returns (rel, record_json | None, error | None)."""
    try:
        chain = parse_chain(chain_str)
        wf = read_wav(Path(input_dir) / rel)
        rng = derive_utterance_rng(seed, rel)
        out, record = run_chain(wf, chain, rng, ranges, utterance=rel, seed=seed)
        out_rel = _output_rel(rel, override, chain_str)
        write_wav(Path(output_dir) / out_rel, out)
        record = replace(record, input_path=rel, output_path=out_rel)
        return rel, record.to_json_obj(), None
    except (RawboostError, OSError) as exc:
        return rel, None, f"{type(exc).__name__}: {exc}"


def _augment_star(args):
    return _augment_one(*args)


def cmd_augment(args) -> int:
    try:
        parse_chain(args.chain)
    except RawboostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV_VAR)
        if env is None:
            print(f"error: --seed not given and {SEED_ENV_VAR} is unset", file=sys.stderr)
            return 2
        seed = int(env)
    if not 0 <= seed < 2**64:
        print(f"error: seed must be a 64-bit unsigned integer, got {seed}", file=sys.stderr)
        return 2
    try:
        ranges = ParameterRanges.from_file(args.config) if args.config else ParameterRanges()
        entries = read_manifest(args.manifest)
    except (RawboostError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    tasks = [
        (e.path, e.output_override, str(args.input_dir), str(args.output_dir), args.chain, seed, ranges)
        for e in entries
    ]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_augment_star, tasks))
    else:
        results = [_augment_star(t) for t in tasks]

    records, failures = [], []
    for rel, record_obj, error in results:
        if error is None:
            records.append(ProvenanceRecord.from_json_obj(record_obj))
        else:
            failures.append((rel, error))
            print(f"FAILED {rel}: {error}", file=sys.stderr)
    if args.provenance:
        write_provenance(args.provenance, records)
    print(f"augmented {len(records)}/{len(entries)} utterances (chain {args.chain!r}, seed {seed})")
    return 0 if not failures else 1


def _verify_record(record: ProvenanceRecord, input_dir, output_dir):
    """Check one record; returns (problems, measurement summaries)."""
    problems: List[str] = []
    measured: List[str] = []
    wf = read_wav(Path(input_dir) / record.input_path)
    replayed, traces = replay(record, wf)

    stored = (Path(output_dir) / record.output_path).read_bytes()
    if stored != wav_bytes(replayed):
        problems.append("replay mismatch: stored output differs from re-derived waveform")

    for trace in traces:
        tech = Technique(trace.technique)
        x, y = trace.input_samples, trace.output_samples
        if tech == Technique.STATIONARY:
            residual = y - x
            snr = 10.0 * np.log10(np.sum(x * x) / np.sum(residual * residual))
            target = trace.params["snr_db"]
            measured.append(f"t3 snr {snr:.4f}/{target:.4f} dB")
            if abs(snr - target) > SNR_CHECK_DB:
                problems.append(
                    f"technique 3: measured SNR {snr:.4f} dB deviates from drawn {target:.4f} dB"
                )
        elif tech == Technique.IMPULSIVE:
            p = int(np.floor(trace.params["p_rel"] * x.size + 0.5))
            modified = int(np.count_nonzero(y != x))
            measured.append(f"t2 modified {modified}/{p}")
            if modified > p:
                problems.append(f"technique 2: {modified} samples modified, recorded maximum {p}")
        else:
            worst = -np.inf
            n_notches = 0
            for order in trace.params["orders"]:
                for notch in order["notches"]:
                    n_notches += 1
                    spec = NotchSpec(f_c=notch["f_c"], delta_f=notch["delta_f"], n_taps=notch["n_taps"])
                    fir = design_notch_fir(spec, record.sample_rate)
                    f_c, lo, hi = spec.clamped(record.sample_rate)
                    freq, mag_db = frequency_response(fir, DESIGN_GRID_POINTS, record.sample_rate)
                    passband = (freq < lo) | (freq > hi)
                    median_db = float(np.median(mag_db[passband]))
                    w = 2.0 * np.pi * f_c / record.sample_rate
                    at_fc = np.abs(np.exp(-1j * w * np.arange(len(fir))) @ fir.coefficients)
                    depth = 20.0 * np.log10(max(at_fc, 1e-15)) - median_db
                    worst = max(worst, depth)
                    if depth > NOTCH_CHECK_DB:
                        problems.append(
                            f"technique 1: notch at {f_c:.1f} Hz only {depth:.1f} dB below passband"
                        )
            measured.append(f"t1 {n_notches} notches <= {worst:.0f} dB")
    return problems, measured


def cmd_verify(args) -> int:
    try:
        records = read_provenance(args.provenance)
    except (OSError, RawboostError, ValueError, KeyError) as exc:
        print(f"error: cannot read provenance: {exc}", file=sys.stderr)
        return 2
    failures = 0
    for record in records:
        try:
            problems, measured = _verify_record(record, args.input_dir, args.output_dir)
        except (RawboostError, OSError) as exc:
            problems, measured = [f"{type(exc).__name__}: {exc}"], []
        detail = f" [{'; '.join(measured)}]" if measured else ""
        if problems:
            failures += 1
            for p in problems:
                print(f"FAIL {record.utterance}: {p}")
        else:
            print(f"OK   {record.utterance}{detail}")
    print(f"verified {len(records) - failures}/{len(records)} records")
    return 0 if failures == 0 else 1


def _parse_notch(text: str, sample_rate: float) -> NotchSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"notch spec {text!r} must be f_c:delta_f:taps")
    f_c, delta_f, taps = float(parts[0]), float(parts[1]), int(parts[2])
    # Values below 1 are read as normalized frequency (f / fs).
    if f_c < 1.0:
        f_c *= sample_rate
        delta_f *= sample_rate
    return NotchSpec(f_c=f_c, delta_f=delta_f, n_taps=taps)


def cmd_design_filter(args) -> int:
    try:
        specs = [_parse_notch(n, args.fs) for n in args.notch]
        fir = design_multiband_fir(specs, args.fs)
        freq, mag_db = frequency_response(fir, args.points, args.fs)
    except (RawboostError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_response_csv(args.out, freq, mag_db)
    print(f"wrote {args.points}-point response of a {len(fir)}-tap filter to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rawboost", description="Raw waveform data boosting")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_aug = sub.add_parser("augment", help="augment a corpus of WAV utterances")
    p_aug.add_argument("--manifest", required=True, help="text file with one relative path per line")
    p_aug.add_argument("--input-dir", required=True)
    p_aug.add_argument("--output-dir", required=True)
    p_aug.add_argument("--chain", required=True, help='e.g. "1", "1+2" (series), "1|2" (parallel)')
    p_aug.add_argument("--seed", type=int, default=None, help=f"64-bit seed (fallback: ${SEED_ENV_VAR})")
    p_aug.add_argument("--config", default=None, help="JSON file with parameter ranges")
    p_aug.add_argument("--workers", type=int, default=1)
    p_aug.add_argument("--provenance", default=None, help="write JSON Lines provenance here")
    p_aug.set_defaults(func=cmd_augment)

    p_ver = sub.add_parser("verify", help="replay provenance and check outputs bit-exactly")
    p_ver.add_argument("--provenance", required=True)
    p_ver.add_argument("--input-dir", required=True)
    p_ver.add_argument("--output-dir", required=True)
    p_ver.set_defaults(func=cmd_verify)

    p_des = sub.add_parser("design-filter", help="emit a multi-band filter response as CSV")
    p_des.add_argument(
        "--notch",
        action="append",
        default=[],
        help="f_c:delta_f:taps (Hz, or normalized when f_c < 1); repeatable",
    )
    p_des.add_argument("--fs", type=float, default=16000.0)
    p_des.add_argument("--points", type=int, default=DESIGN_GRID_POINTS)
    p_des.add_argument("--out", required=True, help="output CSV path")
    p_des.set_defaults(func=cmd_design_filter)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
