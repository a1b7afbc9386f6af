"""Summary-sentence to scene alignment, silver saliency labels, and evaluation.

Three alignment families:

- ``rouge_l``: each summary sentence goes to the scene containing the single
  script sentence with the highest ROUGE-L against it.
- ``greedy_r1``: scenes are added greedily while they increase the ROUGE-1
  coverage of the summary sentence; can yield many scenes per sentence.
- ``embed_argmax`` / ``embed_monotonic``: cosine similarity over precomputed
  embeddings, either independent per sentence or constrained so that aligned
  scene indices never decrease across the summary (an order-preserving
  stand-in for constraint-solver alignment; not a reproduction of it).

A scene is salient when any sentence aligns to it; evaluation macro-averages
precision/recall/F1 over the two saliency classes, then over movies.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .embeddings import EmbeddingMatrix, cosine_matrix
from .errors import (
    DimensionMismatch,
    FileFormatError,
    IndexOutOfRange,
    LengthMismatch,
    MovieMismatch,
    ValidationError,
)
from .parsing import DEFAULT_ABBREVIATIONS, MovieScript, Summary, scene_text, split_sentence_texts, tokenize
from .rouge import RougeScore, rouge_l

logger = logging.getLogger(__name__)

ALIGNMENT_METHODS = ("rouge_l", "greedy_r1", "embed_argmax", "embed_monotonic", "human")


@dataclass(frozen=True)
class AlignmentMap:
    """Per summary sentence, the set of scene indices it aligns to (many-to-many)."""

    movie_id: str
    method: str
    pairs: Mapping[int, frozenset[int]]

    def __post_init__(self):
        if self.method not in ALIGNMENT_METHODS:
            raise ValidationError(f"unknown alignment method {self.method!r}")
        for sentence_idx, scene_ids in self.pairs.items():
            if sentence_idx < 0 or any(i < 0 for i in scene_ids):
                raise ValidationError(f"{self.movie_id}: negative index in alignment pairs")

    @property
    def n_pairs(self) -> int:
        return sum(len(v) for v in self.pairs.values())


@dataclass(frozen=True)
class SaliencyLabels:
    movie_id: str
    labels: tuple[int, ...]
    scores: tuple[float, ...] | None = None

    def __post_init__(self):
        if any(y not in (0, 1) for y in self.labels):
            raise ValidationError(f"{self.movie_id}: labels must be binary")
        if self.scores is not None and len(self.scores) != len(self.labels):
            raise LengthMismatch(f"{self.movie_id}: scores and labels differ in length")

    @property
    def n_scenes(self) -> int:
        return len(self.labels)

    @property
    def salient_indices(self) -> tuple[int, ...]:
        return tuple(i for i, y in enumerate(self.labels) if y == 1)


@dataclass(frozen=True)
class MacroPRF:
    precision: float
    recall: float
    f1: float


def _check_same_movie(script: MovieScript, summary: Summary) -> None:
    if script.movie_id != summary.movie_id:
        raise MovieMismatch(f"script {script.movie_id!r} vs summary {summary.movie_id!r}")


def align_rouge_l(
    script: MovieScript,
    summary: Summary,
    component: str = "f1",
    abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS,
) -> AlignmentMap:
    """Align each summary sentence to the scene holding its best-matching script sentence.

    Scene bodies are split into sentences; the script sentence maximizing
    ROUGE-L (``component`` is ``f1`` or ``recall``) wins, ties going to the
    lowest scene index and then the earliest sentence. Exactly one scene per
    summary sentence. If no scene body yields any sentence, everything maps
    to scene 0.
    """
    _check_same_movie(script, summary)
    if component not in ("f1", "recall"):
        raise ValidationError(f"component must be f1 or recall, got {component!r}")
    script_sentences = [
        (scene.index, tokenize(sentence))
        for scene in script.scenes
        if scene.body
        for sentence in split_sentence_texts(scene.body, abbreviations)
    ]
    pairs: dict[int, frozenset[int]] = {}
    for t, sentence in enumerate(summary.sentences):
        sent_tokens = tokenize(sentence)
        best_score, best_scene = -1.0, 0
        for scene_idx, tokens in script_sentences:
            score = rouge_l(tokens, sent_tokens)
            value = score.f1 if component == "f1" else score.recall
            if value > best_score:
                best_score, best_scene = value, scene_idx
        pairs[t] = frozenset({best_scene})
    return AlignmentMap(movie_id=script.movie_id, method="rouge_l", pairs=pairs)


def _greedy_score(overlap: int, cand_total: int, ref_total: int, component: str) -> float:
    recall = overlap / ref_total if ref_total else 0.0
    if component == "recall":
        return recall
    precision = overlap / cand_total if cand_total else 0.0
    return RougeScore.from_pr(precision, recall).f1


def align_greedy_r1(script: MovieScript, summary: Summary, component: str = "recall") -> AlignmentMap:
    """Greedy per-sentence scene selection by gain in ROUGE-1 coverage.

    For each summary sentence independently, repeatedly add the scene whose
    text most increases the ROUGE-1 ``component`` (default recall) of the
    concatenated selection against the sentence; stop at the first step with
    no positive gain. Sentences with no overlapping scene map to the empty set.
    """
    _check_same_movie(script, summary)
    if component not in ("recall", "f1"):
        raise ValidationError(f"component must be recall or f1, got {component!r}")
    scene_tokens = [tokenize(scene_text(scene)) for scene in script.scenes]
    scene_totals = [len(tokens) for tokens in scene_tokens]

    pairs: dict[int, frozenset[int]] = {}
    for t, sentence in enumerate(summary.sentences):
        reference = Counter(tokenize(sentence))
        ref_total = sum(reference.values())
        if ref_total == 0:
            pairs[t] = frozenset()
            continue
        # Only tokens present in the sentence can contribute to the overlap.
        relevant = [
            {tok: n for tok, n in Counter(tokens).items() if tok in reference}
            for tokens in scene_tokens
        ]
        covered: Counter = Counter()
        overlap = 0
        cand_total = 0
        current = 0.0
        selected: set[int] = set()
        while len(selected) < script.n_scenes:
            best_gain, best_idx, best_delta = 0.0, -1, 0
            for idx in range(script.n_scenes):
                if idx in selected:
                    continue
                delta = sum(
                    min(covered[tok] + n, reference[tok]) - min(covered[tok], reference[tok])
                    for tok, n in relevant[idx].items()
                )
                candidate = _greedy_score(
                    overlap + delta, cand_total + scene_totals[idx], ref_total, component
                )
                gain = candidate - current
                if gain > best_gain:
                    best_gain, best_idx, best_delta = gain, idx, delta
            if best_idx < 0:
                break
            for tok, n in relevant[best_idx].items():
                covered[tok] += n
            overlap += best_delta
            cand_total += scene_totals[best_idx]
            current = _greedy_score(overlap, cand_total, ref_total, component)
            selected.add(best_idx)
        pairs[t] = frozenset(selected)
    return AlignmentMap(movie_id=script.movie_id, method="greedy_r1", pairs=pairs)


def _check_embedding_pair(scene_emb: EmbeddingMatrix, sent_emb: EmbeddingMatrix) -> None:
    if scene_emb.movie_id != sent_emb.movie_id:
        raise MovieMismatch(f"scene {scene_emb.movie_id!r} vs sentence {sent_emb.movie_id!r}")
    if scene_emb.dim != sent_emb.dim:
        raise DimensionMismatch(
            f"{scene_emb.movie_id}: scene dim {scene_emb.dim} vs sentence dim {sent_emb.dim}"
        )


def align_embed_argmax(
    scene_emb: EmbeddingMatrix, sent_emb: EmbeddingMatrix, threshold: float = 1.1
) -> AlignmentMap:
    """Each sentence gets its argmax-cosine scene plus any scene at or above threshold.

    The default threshold is unreachable, so the result is exactly the argmax
    scene per sentence. Ties go to the lower scene index.
    """
    _check_embedding_pair(scene_emb, sent_emb)
    sims = cosine_matrix(sent_emb.vectors, scene_emb.vectors)
    pairs: dict[int, frozenset[int]] = {}
    for t in range(sent_emb.rows):
        chosen = {int(np.argmax(sims[t]))}
        chosen.update(int(j) for j in np.nonzero(sims[t] >= threshold)[0])
        pairs[t] = frozenset(chosen)
    return AlignmentMap(movie_id=scene_emb.movie_id, method="embed_argmax", pairs=pairs)


def align_embed_monotonic(scene_emb: EmbeddingMatrix, sent_emb: EmbeddingMatrix) -> AlignmentMap:
    """One scene per sentence maximizing total cosine, scene indices non-decreasing.

    Dynamic program over sentences; among equally good assignments the smaller
    scene index is preferred at every backtracking step.
    """
    _check_embedding_pair(scene_emb, sent_emb)
    sims = cosine_matrix(sent_emb.vectors, scene_emb.vectors)
    n_sent, n_scene = sims.shape

    best = np.empty_like(sims)
    best[0] = sims[0]
    for t in range(1, n_sent):
        best[t] = np.maximum.accumulate(best[t - 1]) + sims[t]

    assignment = [0] * n_sent
    assignment[-1] = int(np.argmax(best[-1]))
    for t in range(n_sent - 2, -1, -1):
        assignment[t] = int(np.argmax(best[t][: assignment[t + 1] + 1]))
    assert all(a <= b for a, b in zip(assignment, assignment[1:])), "non-monotone assignment"

    pairs = {t: frozenset({scene}) for t, scene in enumerate(assignment)}
    return AlignmentMap(movie_id=scene_emb.movie_id, method="embed_monotonic", pairs=pairs)


def silver_labels(alignment: AlignmentMap, n_scenes: int) -> SaliencyLabels:
    """Scene i is salient iff some sentence aligns to it."""
    labels = [0] * n_scenes
    for sentence_idx, scene_ids in alignment.pairs.items():
        for scene in scene_ids:
            if scene >= n_scenes:
                raise IndexOutOfRange(
                    f"{alignment.movie_id}: sentence {sentence_idx} aligns to scene "
                    f"{scene} but the script has {n_scenes} scenes"
                )
            labels[scene] = 1
    return SaliencyLabels(movie_id=alignment.movie_id, labels=tuple(labels))


def _class_prf(pred: tuple[int, ...], gold: tuple[int, ...], positive: int) -> tuple[float, float, float]:
    tp = sum(1 for p, g in zip(pred, gold) if p == positive and g == positive)
    fp = sum(1 for p, g in zip(pred, gold) if p == positive and g != positive)
    fn = sum(1 for p, g in zip(pred, gold) if p != positive and g == positive)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def movie_macro_prf(pred: SaliencyLabels, gold: SaliencyLabels) -> MacroPRF:
    """Macro average of the salient and non-salient class PRFs for one movie."""
    if pred.n_scenes != gold.n_scenes:
        raise LengthMismatch(
            f"{pred.movie_id}: predicted {pred.n_scenes} labels vs gold {gold.n_scenes}"
        )
    per_class = [_class_prf(pred.labels, gold.labels, positive) for positive in (1, 0)]
    return MacroPRF(
        precision=sum(c[0] for c in per_class) / 2,
        recall=sum(c[1] for c in per_class) / 2,
        f1=sum(c[2] for c in per_class) / 2,
    )


def eval_saliency(
    pred: Mapping[str, SaliencyLabels], gold: Mapping[str, SaliencyLabels]
) -> MacroPRF:
    """Macro PRF per movie (classes first), then averaged across movies.

    0/0 precision or recall is defined as 0, which also pins the macro recall
    of an all-negative prediction against a two-class gold at exactly 0.5.
    """
    if set(pred) != set(gold):
        missing = set(pred) ^ set(gold)
        raise MovieMismatch(f"prediction/gold movie sets differ: {sorted(missing)}")
    if not pred:
        raise ValidationError("no movies to evaluate")
    per_movie = [movie_macro_prf(pred[mid], gold[mid]) for mid in sorted(pred)]
    n = len(per_movie)
    return MacroPRF(
        precision=sum(m.precision for m in per_movie) / n,
        recall=sum(m.recall for m in per_movie) / n,
        f1=sum(m.f1 for m in per_movie) / n,
    )


def alignment_to_json(alignment: AlignmentMap) -> str:
    payload = {
        "movie_id": alignment.movie_id,
        "method": alignment.method,
        "pairs": {str(t): sorted(scenes) for t, scenes in alignment.pairs.items()},
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def alignment_from_json(text: str, source: str = "<json>") -> AlignmentMap:
    try:
        payload = json.loads(text)
        pairs = {int(t): frozenset(scenes) for t, scenes in payload["pairs"].items()}
        alignment = AlignmentMap(
            movie_id=payload["movie_id"], method=payload["method"], pairs=pairs
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{source}: invalid alignment JSON ({exc})") from exc
    empty = [t for t, scenes in sorted(alignment.pairs.items()) if not scenes]
    if empty:
        logger.warning("%s: sentences with no aligned scene: %s", source, empty)
    return alignment


def labels_to_json(labels: SaliencyLabels) -> str:
    payload = {
        "movie_id": labels.movie_id,
        "labels": list(labels.labels),
        "scores": list(labels.scores) if labels.scores is not None else None,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def labels_from_json(text: str, source: str = "<json>") -> SaliencyLabels:
    try:
        payload = json.loads(text)
        scores = payload.get("scores")
        return SaliencyLabels(
            movie_id=payload["movie_id"],
            labels=tuple(payload["labels"]),
            scores=tuple(scores) if scores is not None else None,
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{source}: invalid labels JSON ({exc})") from exc
