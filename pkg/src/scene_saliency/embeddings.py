"""Dense scene/sentence vectors and the EMB1 binary interchange format.

EMB1 layout: magic bytes ``EMB1``, little-endian u32 row count, little-endian
u32 dimension, then ``rows * dim`` little-endian IEEE-754 float32 values in
row-major order. A JSON sidecar at ``<path>.json`` carries
``{"movie_id": str, "unit": "scene"|"sentence"}``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError, ValidationError

MAGIC = b"EMB1"
_HEADER = struct.Struct("<II")

UNITS = ("scene", "sentence")


@dataclass(frozen=True)
class EmbeddingMatrix:
    movie_id: str
    vectors: np.ndarray  # (rows, dim), finite floats

    def __post_init__(self):
        if not self.movie_id:
            raise ValidationError("embedding matrix needs a movie_id")
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 1 or self.vectors.shape[1] < 1:
            raise ValidationError(
                f"{self.movie_id}: embedding matrix must be 2-D and non-empty, "
                f"got shape {self.vectors.shape}"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValidationError(f"{self.movie_id}: embedding matrix contains NaN or Inf")

    @property
    def rows(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_embeddings(path, matrix: EmbeddingMatrix, unit: str) -> None:
    if unit not in UNITS:
        raise ValidationError(f"unit must be one of {UNITS}, got {unit!r}")
    path = Path(path)
    data = np.ascontiguousarray(matrix.vectors, dtype="<f4")
    payload = MAGIC + _HEADER.pack(matrix.rows, matrix.dim) + data.tobytes()
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
    sidecar = {"movie_id": matrix.movie_id, "unit": unit}
    sidecar_path(path).write_text(json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8")


def read_embeddings(path) -> tuple[EmbeddingMatrix, str]:
    """Load an EMB1 file plus sidecar; returns (matrix, unit)."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size:
        raise FileFormatError(f"{path}: truncated embedding file")
    if blob[: len(MAGIC)] != MAGIC:
        raise FileFormatError(f"{path}: bad magic bytes, not an EMB1 file")
    rows, dim = _HEADER.unpack_from(blob, len(MAGIC))
    expected = len(MAGIC) + _HEADER.size + rows * dim * 4
    if len(blob) != expected:
        raise FileFormatError(
            f"{path}: expected {expected} bytes for {rows}x{dim} floats, got {len(blob)}"
        )
    if rows < 1 or dim < 1:
        raise FileFormatError(f"{path}: empty embedding matrix ({rows}x{dim})")
    vectors = np.frombuffer(
        blob, dtype="<f4", count=rows * dim, offset=len(MAGIC) + _HEADER.size
    ).reshape(rows, dim)
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
        movie_id = meta["movie_id"]
        unit = meta["unit"]
    except FileNotFoundError as exc:
        raise FileFormatError(f"{path}: missing sidecar {side}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{side}: invalid sidecar JSON ({exc})") from exc
    if unit not in UNITS:
        raise FileFormatError(f"{side}: unit must be one of {UNITS}, got {unit!r}")
    if not np.all(np.isfinite(vectors)):
        raise FileFormatError(f"{path}: embedding matrix contains NaN or Inf")
    return EmbeddingMatrix(movie_id=movie_id, vectors=vectors.copy()), unit


def cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities; all-zero rows get similarity 0."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a_norm = np.linalg.norm(a, axis=1, keepdims=True)
    b_norm = np.linalg.norm(b, axis=1, keepdims=True)
    a_norm[a_norm == 0.0] = 1.0
    b_norm[b_norm == 0.0] = 1.0
    return (a / a_norm) @ (b / b_norm).T
