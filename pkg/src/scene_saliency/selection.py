"""Salient-scene prediction without summaries at inference time.

Three predictors over per-scene embeddings:

- a majority baseline that marks nothing salient,
- a TextRank-style centrality ranking on the complete cosine-similarity graph,
  with separate weights for edges to preceding and following scenes,
- a logistic scorer trained with class-weighted binary cross-entropy on
  features derived from the embeddings (scene vector, context-window mean,
  normalized position).

The centrality weight on preceding-scene edges defaults to 0.7 and the
following-scene weight to 0.3 (they must sum to 1); top ceil(k*N) scenes are
selected with k defaulting to 0.15. ``swap_lambdas`` flips the direction
binding for experimentation.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import expit

from .alignment import MacroPRF, SaliencyLabels, eval_saliency
from .embeddings import EmbeddingMatrix, cosine_matrix
from .errors import (
    DegenerateLabels,
    DimensionMismatch,
    FileFormatError,
    LengthMismatch,
    TooFewMovies,
    ValidationError,
)


@dataclass(frozen=True)
class TextRankConfig:
    lambda1: float = 0.7  # weight on edges to preceding scenes (j < i)
    lambda2: float = 0.3  # weight on edges to following scenes (j > i)
    k: float = 0.15

    def __post_init__(self):
        if abs(self.lambda1 + self.lambda2 - 1.0) > 1e-9:
            raise ValidationError(
                f"lambda1 + lambda2 must equal 1, got {self.lambda1} + {self.lambda2}"
            )
        if not (0.0 <= self.lambda1 <= 1.0 and 0.0 <= self.lambda2 <= 1.0):
            raise ValidationError("lambda weights must lie in [0, 1]")
        if not 0.0 < self.k <= 1.0:
            raise ValidationError(f"k must lie in (0, 1], got {self.k}")

    def swapped(self) -> "TextRankConfig":
        return TextRankConfig(lambda1=self.lambda2, lambda2=self.lambda1, k=self.k)


def textrank_centrality(emb: EmbeddingMatrix, cfg: TextRankConfig) -> np.ndarray:
    """lambda1 * sum of cosines to preceding scenes + lambda2 * sum to following."""
    sims = cosine_matrix(emb.vectors, emb.vectors)
    preceding = np.tril(sims, -1).sum(axis=1)
    following = np.triu(sims, 1).sum(axis=1)
    return cfg.lambda1 * preceding + cfg.lambda2 * following


def textrank_select(
    emb: EmbeddingMatrix,
    cfg: TextRankConfig | None = None,
    exclude: frozenset[int] | set[int] = frozenset(),
) -> SaliencyLabels:
    """Select the top ceil(k*N) scenes by centrality; ties go to the lower index.

    ``exclude`` removes scenes (e.g. a FRONTMATTER pseudo-scene) from
    eligibility without changing the selection count.
    """
    cfg = cfg or TextRankConfig()
    centrality = textrank_centrality(emb, cfg)
    n = emb.rows
    count = math.ceil(cfg.k * n)
    order = sorted(range(n), key=lambda i: (-centrality[i], i))
    chosen = [i for i in order if i not in exclude][:count]
    labels = [0] * n
    for i in chosen:
        labels[i] = 1
    return SaliencyLabels(
        movie_id=emb.movie_id, labels=tuple(labels), scores=tuple(float(c) for c in centrality)
    )


def majority_select(n_scenes: int, movie_id: str) -> SaliencyLabels:
    """The majority class is non-salient, so predict all zeros."""
    if n_scenes < 1:
        raise ValidationError(f"{movie_id}: n_scenes must be >= 1")
    return SaliencyLabels(movie_id=movie_id, labels=(0,) * n_scenes)


@dataclass(frozen=True)
class ScorerConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    positive_class_weight: float | None = None  # None: #negative / #positive on the train split
    context: int = 2


@dataclass
class LinearScorer:
    weights: np.ndarray
    bias: float
    positive_class_weight: float
    context: int = 2
    loss_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])


def build_features(emb: EmbeddingMatrix, context: int = 2) -> np.ndarray:
    """Per scene: embedding, mean embedding over a +-context window, position i/N."""
    vectors = np.asarray(emb.vectors, dtype=np.float64)
    n = vectors.shape[0]
    window_mean = np.stack(
        [vectors[max(0, i - context) : i + context + 1].mean(axis=0) for i in range(n)]
    )
    position = (np.arange(n, dtype=np.float64) / n).reshape(-1, 1)
    return np.hstack([vectors, window_mean, position])


def scorer_loss(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, pos_weight: float
) -> float:
    """Mean class-weighted binary cross-entropy."""
    z = features @ weights + bias
    log_sigma = -np.logaddexp(0.0, -z)
    log_one_minus = -np.logaddexp(0.0, z)
    return float(-np.mean(pos_weight * labels * log_sigma + (1.0 - labels) * log_one_minus))


def scorer_gradient(
    weights: np.ndarray, bias: float, features: np.ndarray, labels: np.ndarray, pos_weight: float
) -> tuple[np.ndarray, float]:
    probs = expit(features @ weights + bias)
    residual = (1.0 - labels) * probs - pos_weight * labels * (1.0 - probs)
    grad_w = features.T @ residual / labels.shape[0]
    grad_b = float(residual.mean())
    return grad_w, grad_b


def train_scorer(
    features: np.ndarray, labels: np.ndarray, config: ScorerConfig | None = None
) -> LinearScorer:
    """Full-batch gradient descent from zero-initialized parameters (deterministic)."""
    config = config or ScorerConfig()
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.shape[0] != labels.shape[0]:
        raise LengthMismatch(
            f"{features.shape[0]} feature rows vs {labels.shape[0]} labels"
        )
    positives = float(labels.sum())
    negatives = float(labels.shape[0] - positives)
    if positives == 0 or negatives == 0:
        raise DegenerateLabels("training data must contain both classes")
    pos_weight = (
        config.positive_class_weight
        if config.positive_class_weight is not None
        else negatives / positives
    )
    weights = np.zeros(features.shape[1], dtype=np.float64)
    bias = 0.0
    history = [scorer_loss(weights, bias, features, labels, pos_weight)]
    for _ in range(config.epochs):
        grad_w, grad_b = scorer_gradient(weights, bias, features, labels, pos_weight)
        weights = weights - config.learning_rate * grad_w
        bias = bias - config.learning_rate * grad_b
        history.append(scorer_loss(weights, bias, features, labels, pos_weight))
    return LinearScorer(
        weights=weights,
        bias=bias,
        positive_class_weight=pos_weight,
        context=config.context,
        loss_history=history,
    )


def predict_scorer(
    model: LinearScorer, features: np.ndarray, movie_id: str, threshold: float = 0.5
) -> SaliencyLabels:
    """Label 1 where the predicted probability reaches the threshold."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.dim:
        raise DimensionMismatch(
            f"{movie_id}: features have dim {features.shape[-1]}, model expects {model.dim}"
        )
    probs = expit(features @ model.weights + model.bias)
    labels = tuple(int(p >= threshold) for p in probs)
    return SaliencyLabels(movie_id=movie_id, labels=labels, scores=tuple(float(p) for p in probs))


def scorer_to_json(model: LinearScorer) -> str:
    payload = {
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
        "positive_class_weight": float(model.positive_class_weight),
        "feature_spec": {"context": model.context},
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def scorer_from_json(text: str, source: str = "<json>") -> LinearScorer:
    try:
        payload = json.loads(text)
        return LinearScorer(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            positive_class_weight=float(payload["positive_class_weight"]),
            context=int(payload["feature_spec"]["context"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{source}: invalid scorer JSON ({exc})") from exc


@dataclass(frozen=True)
class KFoldResult:
    mean: MacroPRF
    std: MacroPRF
    per_fold: tuple[MacroPRF, ...]


def kfold_eval(
    corpus: Mapping[str, tuple[EmbeddingMatrix, SaliencyLabels]],
    k: int = 5,
    method: str = "scorer",
    scorer_config: ScorerConfig | None = None,
    textrank_config: TextRankConfig | None = None,
    threshold: float = 0.5,
    seed: int = 0,
) -> KFoldResult:
    """Movie-level k-fold evaluation: shuffle ids, split contiguously, hold one fold out.

    For ``scorer`` the held-in folds are the training set; ``textrank`` and
    ``majority`` need no training and are just evaluated fold by fold.
    Fold statistics use the population standard deviation.
    """
    if method not in ("scorer", "textrank", "majority"):
        raise ValidationError(f"unknown kfold method {method!r}")
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    movie_ids = sorted(corpus)
    if len(movie_ids) < k:
        raise TooFewMovies(f"need at least {k} movies, got {len(movie_ids)}")
    rng = random.Random(seed)
    rng.shuffle(movie_ids)
    fold_sizes = [len(movie_ids) // k + (1 if i < len(movie_ids) % k else 0) for i in range(k)]
    folds, cursor = [], 0
    for size in fold_sizes:
        folds.append(movie_ids[cursor : cursor + size])
        cursor += size

    config = scorer_config or ScorerConfig()
    per_fold: list[MacroPRF] = []
    for held_out in folds:
        train_ids = [mid for mid in movie_ids if mid not in held_out]
        preds: dict[str, SaliencyLabels] = {}
        golds = {mid: corpus[mid][1] for mid in held_out}
        if method == "scorer":
            train_x = np.vstack(
                [build_features(corpus[mid][0], config.context) for mid in train_ids]
            )
            train_y = np.concatenate(
                [np.asarray(corpus[mid][1].labels, dtype=np.float64) for mid in train_ids]
            )
            model = train_scorer(train_x, train_y, config)
            for mid in held_out:
                preds[mid] = predict_scorer(
                    model, build_features(corpus[mid][0], config.context), mid, threshold
                )
        elif method == "textrank":
            for mid in held_out:
                preds[mid] = textrank_select(corpus[mid][0], textrank_config)
        else:
            for mid in held_out:
                preds[mid] = majority_select(corpus[mid][1].n_scenes, mid)
        per_fold.append(eval_saliency(preds, golds))

    def stats(attr: str) -> tuple[float, float]:
        values = np.array([getattr(m, attr) for m in per_fold])
        return float(values.mean()), float(values.std())

    p_mean, p_std = stats("precision")
    r_mean, r_std = stats("recall")
    f_mean, f_std = stats("f1")
    return KFoldResult(
        mean=MacroPRF(p_mean, r_mean, f_mean),
        std=MacroPRF(p_std, r_std, f_std),
        per_fold=tuple(per_fold),
    )
