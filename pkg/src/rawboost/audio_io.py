"""WAV ingest/emit, manifest parsing and provenance persistence.

Only RIFF/WAVE PCM 16-bit mono is supported; anything else is rejected
rather than silently resampled or downmixed. Samples are read as
int16/32768 (so the full int16 range maps into [-1, 1)) and written as
round-half-away-from-zero of sample*32768, clamped to the int16 range.
Read and write are exact inverses on the 16-bit grid, so re-encoding a
decoded file is lossless, and one quantize/dequantize round trip moves
any sample by at most 1/32768 (clamping +1.0 to 32767 included).
"""

from __future__ import annotations

import io
import json
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .core import Waveform
from .errors import ConfigurationError, UnsupportedFormatError
from .pipeline import ProvenanceRecord

__all__ = [
    "read_wav",
    "write_wav",
    "wav_bytes",
    "quantize",
    "dequantize",
    "ManifestEntry",
    "read_manifest",
    "write_provenance",
    "read_provenance",
]

_SCALE = 32768.0


def quantize(samples: np.ndarray) -> np.ndarray:
    """Map float samples to int16 by round-half-away-from-zero of x*32768."""
    x = np.asarray(samples, dtype=np.float64)
    scaled = x * _SCALE
    rounded = np.trunc(scaled + np.copysign(0.5, scaled))
    return np.clip(rounded, -32768, 32767).astype(np.int16)


def dequantize(values: np.ndarray) -> np.ndarray:
    """Map int16 samples to floats in [-1, 1) by division by 32768."""
    return np.asarray(values, dtype=np.float64) / _SCALE


def read_wav(path) -> Waveform:
    """Read a PCM 16-bit mono WAV file."""
    try:
        reader = wave.open(str(path), "rb")
    except FileNotFoundError:
        raise
    except (wave.Error, EOFError) as exc:
        raise UnsupportedFormatError(f"{path}: not a readable RIFF/WAVE file ({exc})") from exc
    with reader:
        if reader.getcomptype() != "NONE":
            raise UnsupportedFormatError(f"{path}: compressed WAV ({reader.getcomptype()}) is unsupported")
        if reader.getnchannels() != 1:
            raise UnsupportedFormatError(f"{path}: {reader.getnchannels()} channels; only mono is supported")
        if reader.getsampwidth() != 2:
            raise UnsupportedFormatError(
                f"{path}: {8 * reader.getsampwidth()}-bit samples; only PCM 16-bit is supported"
            )
        n = reader.getnframes()
        if n < 1:
            raise UnsupportedFormatError(f"{path}: empty audio stream")
        raw = reader.readframes(n)
        rate = reader.getframerate()
    values = np.frombuffer(raw, dtype="<i2")
    return Waveform(samples=dequantize(values), sample_rate=rate)


def wav_bytes(wf: Waveform) -> bytes:
    """Serialize a waveform to PCM 16-bit mono WAV bytes."""
    buf = io.BytesIO()
    with wave.open(buf, "wb") as writer:
        writer.setnchannels(1)
        writer.setsampwidth(2)
        writer.setframerate(wf.sample_rate)
        writer.writeframes(quantize(wf.samples).astype("<i2").tobytes())
    return buf.getvalue()


def write_wav(path, wf: Waveform) -> None:
    """Write a waveform as a PCM 16-bit mono WAV file."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(wav_bytes(wf))


@dataclass(frozen=True)
class ManifestEntry:
    """One corpus utterance: relative input path, optional output override."""

    path: str
    output_override: Optional[str] = None


def read_manifest(path) -> List[ManifestEntry]:
    """Read a manifest: one relative path per line, optional tab-separated
    output name override, '#' comment lines ignored. Paths must be unique."""
    entries: List[ManifestEntry] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split("\t")
            rel = parts[0].strip()
            if not rel:
                raise ConfigurationError(f"{path}:{lineno}: empty utterance path")
            if rel.startswith("/") or ".." in rel.split("/"):
                raise ConfigurationError(
                    f"{path}:{lineno}: utterance path must be relative without '..': {rel!r}"
                )
            if rel in seen:
                raise ConfigurationError(f"{path}:{lineno}: duplicate utterance path {rel!r}")
            seen.add(rel)
            override = parts[1].strip() if len(parts) > 1 and parts[1].strip() else None
            entries.append(ManifestEntry(path=rel, output_override=override))
    return entries


def write_provenance(path, records: Sequence[ProvenanceRecord]) -> None:
    """Write records as JSON Lines, one record per line."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_obj(), separators=(",", ":")))
            fh.write("\n")


def read_provenance(path) -> List[ProvenanceRecord]:
    """Read a JSON Lines provenance file."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ProvenanceRecord.from_json_obj(json.loads(line)))
    return records
