"""Inter-annotator agreement over triple-annotated sentence-to-scene alignments.

Three measures over per-sentence scene index sets from annotators A, B, C:

- exact match agreement: mean per-sentence Jaccard of the three sets
- partial agreement: fraction of sentences where all three share a scene
- mean annotation distance: per sentence, the maximum over the three pairwise
  minimum index gaps, averaged over sentences

Exactly three annotators are supported; sentences where an annotator marked
nothing are rejected so that data cleaning stays explicit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .errors import EmptySet, EmptyUnion, FileFormatError, ValidationError


@dataclass(frozen=True)
class SentenceAnnotation:
    a: frozenset[int]
    b: frozenset[int]
    c: frozenset[int]

    def __post_init__(self):
        for name, indices in (("A", self.a), ("B", self.b), ("C", self.c)):
            if any(i < 0 for i in indices):
                raise ValidationError(f"annotator {name} has a negative scene index")

    @property
    def sets(self) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        return (self.a, self.b, self.c)


@dataclass(frozen=True)
class AnnotationSet:
    """Per-sentence annotator sets, possibly pooled across several summaries."""

    sentences: tuple[SentenceAnnotation, ...]

    def __post_init__(self):
        if not self.sentences:
            raise ValidationError("annotation set has no sentences")

    @property
    def total_sentences(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class AgreementReport:
    ema: float
    pa: float
    mean_distance: float

    def __post_init__(self):
        if self.ema > self.pa + 1e-12:
            raise ValidationError(f"ema {self.ema} exceeds pa {self.pa}")
        if self.mean_distance < 0:
            raise ValidationError("mean_distance must be non-negative")


def ema(ann: AnnotationSet) -> float:
    """Mean per-sentence Jaccard similarity |A∩B∩C| / |A∪B∪C|."""
    total = 0.0
    for sent in ann.sentences:
        union = sent.a | sent.b | sent.c
        if not union:
            raise EmptyUnion("a sentence has no scene marked by any annotator")
        total += len(sent.a & sent.b & sent.c) / len(union)
    return total / ann.total_sentences


def pa(ann: AnnotationSet) -> float:
    """Fraction of sentences where the three annotators share at least one scene."""
    hits = sum(1 for sent in ann.sentences if sent.a & sent.b & sent.c)
    return hits / ann.total_sentences


def annotation_distance(x: frozenset[int] | set[int], y: frozenset[int] | set[int]) -> int:
    """Minimum absolute index gap between any pair of scenes from the two sets."""
    if not x or not y:
        raise EmptySet("annotation distance needs two non-empty sets")
    return min(abs(i - j) for i in x for j in y)


def mean_annotation_distance(ann: AnnotationSet) -> float:
    """Per sentence, the max of the three pairwise distances; averaged over sentences."""
    total = 0
    for sent in ann.sentences:
        d_ab = annotation_distance(sent.a, sent.b)
        d_ac = annotation_distance(sent.a, sent.c)
        d_bc = annotation_distance(sent.b, sent.c)
        total += max(d_ab, d_ac, d_bc)
    return total / ann.total_sentences


def agreement_report(ann: AnnotationSet) -> AgreementReport:
    return AgreementReport(ema=ema(ann), pa=pa(ann), mean_distance=mean_annotation_distance(ann))


def annotation_set_from_json(text: str, source: str = "<json>") -> AnnotationSet:
    """Parse one movie's annotation file: {"movie_id", "sentences": [{idx, A, B, C}]}."""
    try:
        payload = json.loads(text)
        entries = sorted(payload["sentences"], key=lambda e: e["idx"])
        sentences = tuple(
            SentenceAnnotation(
                a=frozenset(entry["A"]), b=frozenset(entry["B"]), c=frozenset(entry["C"])
            )
            for entry in entries
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FileFormatError(f"{source}: invalid annotation JSON ({exc})") from exc
    return AnnotationSet(sentences=sentences)


def pool_annotation_sets(sets: Iterable[AnnotationSet]) -> AnnotationSet:
    """Concatenate per-movie annotation sets into one pooled set."""
    sentences: list[SentenceAnnotation] = []
    for ann in sets:
        sentences.extend(ann.sentences)
    return AnnotationSet(sentences=tuple(sentences))
