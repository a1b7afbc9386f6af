import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scene_saliency.rouge import RougeScore, lcs_length, rouge_l, rouge_n

_tokens = st.lists(st.sampled_from("abcdef"), max_size=12)


def brute_force_lcs(a, b):
    """Longest common subsequence by enumerating every subsequence of the shorter list."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for r in range(len(short), 0, -1):
        for combo in itertools.combinations(short, r):
            it = iter(long_)
            if all(tok in it for tok in combo):
                best = r
                break
        if best:
            break
    return best


def test_rouge_n_identity():
    score = rouge_n(["a", "b", "c"], ["a", "b", "c"], 1)
    assert score == RougeScore(1.0, 1.0, 1.0)


def test_rouge_n_disjoint():
    assert rouge_n(["a", "b"], ["c", "d"], 1) == RougeScore(0.0, 0.0, 0.0)


def test_rouge_1_two_thirds():
    score = rouge_n(["the", "cat", "sat"], ["the", "cat", "ran"], 1)
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(2 / 3)


def test_rouge_n_clipping():
    # candidate repeats "a" three times, reference has it once
    score = rouge_n(["a", "a", "a"], ["a", "b"], 1)
    assert score.precision == pytest.approx(1 / 3)
    assert score.recall == pytest.approx(1 / 2)


def test_rouge_2_empty_ngram_side():
    # reference shorter than n: no reference bigrams, recall component is 0
    score = rouge_n(["a", "b", "c"], ["a"], 2)
    assert score.recall == 0.0
    assert score.f1 == 0.0


def test_rouge_n_rejects_bad_n():
    with pytest.raises(ValueError):
        rouge_n(["a"], ["a"], 0)


def test_rouge_l_identity():
    assert rouge_l(["x", "y"], ["x", "y"]) == RougeScore(1.0, 1.0, 1.0)


def test_rouge_l_two_thirds():
    score = rouge_l(["the", "cat", "sat"], ["the", "cat", "ran"])
    assert lcs_length(["the", "cat", "sat"], ["the", "cat", "ran"]) == 2
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(2 / 3)


def test_rouge_l_reversed_pair():
    score = rouge_l(["b", "a"], ["a", "b"])
    assert score.precision == 0.5
    assert score.recall == 0.5
    assert score.f1 == 0.5


def test_rouge_l_empty_sides():
    assert rouge_l([], ["a"]) == RougeScore(0.0, 0.0, 0.0)
    assert rouge_l(["a"], []) == RougeScore(0.0, 0.0, 0.0)


def test_lcs_matches_brute_force_exhaustively():
    rng = random.Random(7)
    for _ in range(300):
        a = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        b = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
        assert lcs_length(a, b) == brute_force_lcs(a, b), (a, b)


@given(_tokens, _tokens)
@settings(max_examples=300)
def test_swap_symmetry(a, b):
    assert rouge_n(a, b, 1).precision == rouge_n(b, a, 1).recall
    assert rouge_l(a, b).precision == rouge_l(b, a).recall


@given(_tokens, _tokens)
@settings(max_examples=300)
def test_lcs_bounded_and_self_identity(a, b):
    assert lcs_length(a, b) <= min(len(a), len(b))
    if a:
        assert rouge_l(a, a) == RougeScore(1.0, 1.0, 1.0)


@given(_tokens.filter(lambda t: len(t) > 0), st.data())
@settings(max_examples=200)
def test_appending_reference_token_never_lowers_recall(reference, data):
    candidate = data.draw(_tokens)
    extra = data.draw(st.sampled_from(reference))
    before = rouge_n(candidate, reference, 1).recall
    after = rouge_n(candidate + [extra], reference, 1).recall
    assert after >= before


def test_f1_zero_when_pr_zero():
    assert RougeScore.from_pr(0.0, 0.0).f1 == 0.0
    score = RougeScore.from_pr(0.4, 0.6)
    assert score.f1 == pytest.approx(2 * 0.4 * 0.6 / 1.0)
