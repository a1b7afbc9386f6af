import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scene_saliency.agreement import (
    AgreementReport,
    AnnotationSet,
    SentenceAnnotation,
    agreement_report,
    annotation_distance,
    annotation_set_from_json,
    ema,
    mean_annotation_distance,
    pa,
    pool_annotation_sets,
)
from scene_saliency.errors import EmptySet, EmptyUnion, ValidationError


def ann(*triples):
    return AnnotationSet(
        sentences=tuple(
            SentenceAnnotation(a=frozenset(a), b=frozenset(b), c=frozenset(c))
            for a, b, c in triples
        )
    )


def test_ema_identical_sets():
    assert ema(ann(({3, 4}, {3, 4}, {3, 4}), ({1}, {1}, {1}))) == 1.0


def test_ema_hand_example():
    assert ema(ann(({3, 4}, {3, 4}, {3},))) == 0.5


def test_ema_empty_union_rejected():
    with pytest.raises(EmptyUnion):
        ema(ann((set(), set(), set())))


def test_pa_disjoint():
    assert pa(ann(({1}, {2}, {3}), ({4}, {5}, {6}))) == 0.0


def test_pa_hand_example():
    assert pa(ann(({3, 4}, {3, 4}, {3},))) == 1.0


def test_annotation_distance():
    assert annotation_distance({2}, {5, 9}) == 3
    assert annotation_distance({7}, {7}) == 0
    assert annotation_distance({1, 8}, {6}) == 2
    with pytest.raises(EmptySet):
        annotation_distance(set(), {1})


def test_mean_distance_identical():
    assert mean_annotation_distance(ann(({2}, {2}, {2}))) == 0.0


def test_mean_distance_hand_example():
    assert mean_annotation_distance(ann(({1}, {2}, {4}))) == 3.0


def test_report_combines_all_three():
    report = agreement_report(ann(({3, 4}, {3, 4}, {3},)))
    assert report == AgreementReport(ema=0.5, pa=1.0, mean_distance=0.0)


def test_report_rejects_ema_above_pa():
    with pytest.raises(ValidationError):
        AgreementReport(ema=0.9, pa=0.5, mean_distance=0.0)


def test_json_loading_and_pooling():
    text = """{"movie_id": "m", "sentences": [
        {"idx": 1, "A": [2], "B": [2], "C": [3]},
        {"idx": 0, "A": [0], "B": [0], "C": [0]}
    ]}"""
    loaded = annotation_set_from_json(text)
    assert loaded.sentences[0].a == frozenset({0})  # sorted by idx
    pooled = pool_annotation_sets([loaded, loaded])
    assert pooled.total_sentences == 4


# --- independent re-implementation oracle -----------------------------------


def oracle_metrics(triples):
    """Straight transcription of the three agreement definitions."""
    t_m = len(triples)
    ema_val = sum(
        len(a & b & c) / len(a | b | c) for a, b, c in triples
    ) / t_m
    pa_val = sum(1 for a, b, c in triples if a & b & c) / t_m

    def d(x, y):
        return min(abs(i - j) for i in x for j in y)

    dist = sum(max(d(a, b), d(a, c), d(b, c)) for a, b, c in triples) / t_m
    return ema_val, pa_val, dist


def random_annotation_triples(rng, n_sentences, n_scenes=20):
    triples = []
    for _ in range(n_sentences):
        triples.append(
            tuple(
                frozenset(rng.sample(range(n_scenes), rng.randint(1, 4)))
                for _ in range(3)
            )
        )
    return triples


def test_matches_independent_oracle_on_constructed_sets():
    rng = random.Random(11)
    for _ in range(50):
        triples = random_annotation_triples(rng, rng.randint(1, 12))
        annset = ann(*triples)
        expected_ema, expected_pa, expected_d = oracle_metrics(triples)
        assert ema(annset) == expected_ema
        assert pa(annset) == expected_pa
        assert mean_annotation_distance(annset) == expected_d


# --- properties --------------------------------------------------------------

_index_set = st.frozensets(st.integers(min_value=0, max_value=15), min_size=1, max_size=4)
_sentence = st.tuples(_index_set, _index_set, _index_set)
_annotations = st.lists(_sentence, min_size=1, max_size=8)


@given(_annotations)
@settings(max_examples=200)
def test_ema_le_pa(triples):
    annset = ann(*triples)
    assert ema(annset) <= pa(annset) + 1e-12


@given(_annotations)
@settings(max_examples=200)
def test_permutation_invariance(triples):
    base = agreement_report(ann(*triples))
    for perm in itertools.permutations(range(3)):
        permuted = ann(*[tuple(t[i] for i in perm) for t in triples])
        report = agreement_report(permuted)
        assert report.ema == pytest.approx(base.ema)
        assert report.pa == base.pa
        assert report.mean_distance == pytest.approx(base.mean_distance)


@given(_sentence, st.integers(min_value=16, max_value=30))
def test_shared_extra_scene_never_lowers_ema(triple, extra):
    a, b, c = triple
    before = ema(ann(triple))
    after = ema(ann((a | {extra}, b | {extra}, c | {extra})))
    assert after >= before - 1e-12


@given(_index_set, _index_set)
def test_distance_symmetric_and_zero_iff_overlap(x, y):
    assert annotation_distance(x, y) == annotation_distance(y, x)
    assert (annotation_distance(x, y) == 0) == bool(x & y)
