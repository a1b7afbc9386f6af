"""Read parsed inputs, encode, and write the EMB1 file plus sidecar.

EMB1 layout: magic ``EMB1``, little-endian u32 row count, little-endian u32
dimension, then row-major little-endian float32 values. The sidecar at
``<out>.json`` names the movie and the unit and records how the vectors were
produced.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
_HEADER = struct.Struct("<II")

UNITS = ("scene", "sentence")


class InputError(Exception):
    """Input file missing or not matching the declared schema."""


@dataclass(frozen=True)
class ExportJob:
    input_path: Path
    unit: str
    encoder: str
    pooling: str
    output_path: Path
    include_headings: bool = True


def read_units(path: Path, unit: str, include_headings: bool = True) -> tuple[str, list[str]]:
    """Return (movie_id, texts): scene texts from JSONL or sentences from JSON."""
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if unit == "scene":
            records = [json.loads(line) for line in text.splitlines() if line.strip()]
            if not records:
                raise InputError(f"{path}: no scene records")
            movie_id = records[0]["movie_id"]
            texts = []
            for rec in records:
                if include_headings and rec["heading"]:
                    texts.append(f"{rec['heading']}\n{rec['body']}" if rec["body"] else rec["heading"])
                else:
                    texts.append(rec["body"] or rec["heading"])
            return movie_id, texts
        payload = json.loads(text)
        return payload["movie_id"], list(payload["sentences"])
    except InputError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: does not match the {unit} schema ({exc})") from exc


def write_emb1(path: Path, movie_id: str, unit: str, vectors: np.ndarray, meta: dict) -> None:
    rows, dim = vectors.shape
    data = np.ascontiguousarray(vectors, dtype="<f4")
    payload = MAGIC + _HEADER.pack(rows, dim) + data.tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
    sidecar = {"movie_id": movie_id, "unit": unit, **meta}
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8"
    )


def run_export(job: ExportJob) -> int:
    """Encode the job's units and write the EMB1 pair; returns the row count."""
    from .encoders import build_encoder

    if job.unit not in UNITS:
        raise InputError(f"unit must be one of {UNITS}, got {job.unit!r}")
    encoder = build_encoder(job.encoder, job.pooling)
    movie_id, texts = read_units(job.input_path, job.unit, job.include_headings)
    if not texts:
        raise InputError(f"{job.input_path}: no units to encode")
    vectors = encoder.encode(texts)
    if vectors.shape != (len(texts), encoder.dim):
        raise InputError(
            f"encoder returned shape {vectors.shape}, expected ({len(texts)}, {encoder.dim})"
        )
    if not np.all(np.isfinite(vectors)):
        raise InputError("encoder produced non-finite values")
    write_emb1(
        job.output_path,
        movie_id,
        job.unit,
        vectors,
        {"encoder": job.encoder, "pooling": job.pooling},
    )
    return len(texts)
