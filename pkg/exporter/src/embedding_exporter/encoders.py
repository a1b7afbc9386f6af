"""Text encoders: a deterministic hashed bag-of-tokens baseline and an
optional transformers backend.

Encoder names:

- ``hash-<dim>`` (default ``hash-384``): every token maps to a fixed pseudo-
  random vector derived from its MD5 digest; ``first`` pooling takes the
  first token's vector, ``mean`` averages all of them. No model download,
  byte-stable across runs and machines.
- ``transformers:<name-or-path>``: hidden states from a local/cached
  Hugging Face model; ``first`` pooling takes the first token's last hidden
  state, ``mean`` the attention-masked average. Inputs longer than the
  model's limit are truncated with a logged warning.
"""

from __future__ import annotations

import hashlib
import logging
import re

import numpy as np

logger = logging.getLogger(__name__)

POOLINGS = ("first", "mean")

_HASH_NAME = re.compile(r"^hash-(\d+)$")


class EncoderError(Exception):
    """Unknown encoder name or failure to load the backing model."""


def _token_vector(token: str, dim: int) -> np.ndarray:
    digest = hashlib.md5(token.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(seed).normal(size=dim)


def _tokenize(text: str) -> list[str]:
    return text.lower().split()


class HashEncoder:
    def __init__(self, dim: int, pooling: str):
        self.dim = dim
        self.pooling = pooling

    def encode(self, texts: list[str]) -> np.ndarray:
        rows = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = _tokenize(text)
            if not tokens:
                continue
            if self.pooling == "first":
                vec = _token_vector(tokens[0], self.dim)
            else:
                vec = np.mean([_token_vector(t, self.dim) for t in tokens], axis=0)
            norm = np.linalg.norm(vec)
            rows[i] = vec / norm if norm else vec
        return rows


class TransformersEncoder:
    def __init__(self, model_name: str, pooling: str):
        try:
            import torch  # noqa: F401
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderError(f"transformers backend unavailable: {exc}") from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as exc:
            raise EncoderError(f"cannot load model {model_name!r}: {exc}") from exc
        self.model.eval()
        self.pooling = pooling
        self.dim = int(self.model.config.hidden_size)
        self.max_length = int(self.tokenizer.model_max_length)

    def encode(self, texts: list[str]) -> np.ndarray:
        import torch

        over = sum(
            1 for t in texts if len(self.tokenizer(t)["input_ids"]) > self.max_length
        )
        if over:
            logger.warning(
                "%d of %d inputs exceed the encoder limit of %d tokens and are truncated",
                over, len(texts), self.max_length,
            )
        rows = []
        with torch.no_grad():
            for text in texts:
                batch = self.tokenizer(
                    text, return_tensors="pt", truncation=True, max_length=self.max_length
                )
                hidden = self.model(**batch).last_hidden_state[0]
                if self.pooling == "first":
                    vec = hidden[0]
                else:
                    mask = batch["attention_mask"][0].unsqueeze(-1)
                    vec = (hidden * mask).sum(dim=0) / mask.sum()
                rows.append(vec.numpy().astype(np.float64))
        return np.asarray(rows)


def build_encoder(name: str, pooling: str):
    if pooling not in POOLINGS:
        raise EncoderError(f"pooling must be one of {POOLINGS}, got {pooling!r}")
    match = _HASH_NAME.match(name)
    if match:
        dim = int(match.group(1))
        if dim < 1:
            raise EncoderError(f"hash encoder dimension must be >= 1, got {dim}")
        return HashEncoder(dim, pooling)
    if name.startswith("transformers:"):
        return TransformersEncoder(name.split(":", 1)[1], pooling)
    raise EncoderError(
        f"unknown encoder {name!r} (use hash-<dim> or transformers:<model>)"
    )
