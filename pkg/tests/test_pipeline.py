import json
import shutil

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scene_saliency.alignment import AlignmentMap, SaliencyLabels
from scene_saliency.embeddings import EmbeddingMatrix, write_embeddings
from scene_saliency.errors import (
    InconsistentCorpus,
    LengthMismatch,
    NoSalientScenes,
    StageError,
    ValidationError,
)
from scene_saliency.parsing import parse_script, script_text, split_sentences, tokenize
from scene_saliency.pipeline import (
    PipelineConfig,
    PreparedInput,
    corpus_stats,
    prepare_input,
    run_pipeline,
)
from scene_saliency.selection import TextRankConfig

BODY = "w1 w2 w3 w4 w5 w6 w7 w8"  # 8 tokens; heading INT. X adds 2


def four_scene_script(movie_id="m"):
    text = "\n".join(
        [
            "INT. A",
            BODY,
            "INT. B",
            BODY,
            "INT. C",
            BODY,
            "INT. D",
            BODY,
        ]
    )
    return parse_script(text, movie_id)


# --- corpus stats ------------------------------------------------------------


def small_corpus():
    scripts = {
        "m1": four_scene_script("m1"),
        "m2": parse_script("INT. X\nhello there world.", "m2"),
    }
    summaries = {
        "m1": split_sentences("First point. Second point.", "m1"),
        "m2": split_sentences("Only one.", "m2"),
    }
    alignments = {
        "m1": AlignmentMap("m1", "human", {0: frozenset({0, 2}), 1: frozenset({2})}),
        "m2": AlignmentMap("m2", "human", {0: frozenset()}),
    }
    return scripts, summaries, alignments


def test_corpus_stats_counts():
    scripts, summaries, alignments = small_corpus()
    report = corpus_stats(scripts, summaries, alignments)
    assert report.n_movies == 2
    assert report.n_scenes == 5
    assert report.n_sentences == 3
    assert report.n_alignment_pairs == 3  # |{0,2}| + |{2}| + |{}|
    assert report.n_salient_scenes == 2  # distinct {0, 2} in m1, none in m2
    assert report.mean_script_tokens == pytest.approx((40 + 5) / 2)
    assert report.mean_summary_tokens == pytest.approx((4 + 2) / 2)


def test_corpus_stats_without_alignments():
    scripts, summaries, _ = small_corpus()
    report = corpus_stats(scripts, summaries)
    assert report.n_alignment_pairs == 0
    assert report.n_salient_scenes == 0


def test_corpus_stats_permutation_invariant():
    scripts, summaries, alignments = small_corpus()
    flipped = corpus_stats(
        dict(reversed(scripts.items())),
        dict(reversed(summaries.items())),
        dict(reversed(alignments.items())),
    )
    assert flipped == corpus_stats(scripts, summaries, alignments)


def test_corpus_stats_inconsistent_ids():
    scripts, summaries, _ = small_corpus()
    with pytest.raises(InconsistentCorpus):
        corpus_stats(scripts, {"m1": summaries["m1"]})


def test_corpus_stats_out_of_range_alignment():
    scripts, summaries, alignments = small_corpus()
    alignments["m2"] = AlignmentMap("m2", "human", {0: frozenset({7})})
    with pytest.raises(InconsistentCorpus):
        corpus_stats(scripts, summaries, alignments)


# --- prepare_input -----------------------------------------------------------


def test_prepare_under_budget():
    script = four_scene_script()
    labels = SaliencyLabels("m", (1, 0, 1, 0))
    prepared = prepare_input(script, labels, budget=100)
    assert prepared.included_scenes == (0, 2)
    assert prepared.token_count == 20
    assert "INT. A" in prepared.text and "INT. C" in prepared.text
    assert "INT. B" not in prepared.text


def test_prepare_truncates_final_scene():
    script = four_scene_script()
    labels = SaliencyLabels("m", (1, 0, 1, 0))
    prepared = prepare_input(script, labels, budget=15)
    assert prepared.included_scenes == (0, 2)
    assert prepared.token_count == 15
    assert len(tokenize(prepared.text)) == 15
    assert prepared.text.endswith("INT. C w1 w2 w3")


def test_prepare_identity_with_unlimited_budget():
    script = parse_script(
        "Front matter line\nINT. A\n" + BODY + "\n\nEXT. B\nshort text.", "m"
    )
    labels = SaliencyLabels("m", (1,) * script.n_scenes)
    prepared = prepare_input(script, labels, budget=None)
    assert prepared.text == script_text(script)
    assert prepared.included_scenes == tuple(range(script.n_scenes))


def test_prepare_fallbacks():
    script = four_scene_script()
    empty = SaliencyLabels("m", (0, 0, 0, 0))
    with pytest.raises(NoSalientScenes):
        prepare_input(script, empty, fallback="error")
    lead = prepare_input(script, empty, budget=12, fallback="lead")
    assert lead.included_scenes == (0, 1)
    assert lead.token_count == 12
    with pytest.raises(ValidationError):
        prepare_input(script, empty, fallback="textrank")
    rng = np.random.default_rng(0)
    emb = EmbeddingMatrix(movie_id="m", vectors=rng.normal(size=(4, 3)))
    ranked = prepare_input(
        script, empty, fallback="textrank", embeddings=emb,
        textrank_config=TextRankConfig(k=0.25),
    )
    assert len(ranked.included_scenes) == 1


def test_prepare_lead_fallback_skips_frontmatter():
    script = parse_script("Title page\nINT. A\n" + BODY, "m")
    assert script.scenes[0].heading == "FRONTMATTER"
    empty = SaliencyLabels("m", (0, 0))
    lead = prepare_input(script, empty, fallback="lead")
    assert lead.included_scenes == (1,)
    kept = prepare_input(script, empty, fallback="lead", include_frontmatter=True)
    assert kept.included_scenes == (0, 1)


def test_prepare_respects_explicit_frontmatter_label():
    script = parse_script("Title page\nINT. A\n" + BODY, "m")
    labels = SaliencyLabels("m", (1, 0))
    prepared = prepare_input(script, labels)
    assert prepared.included_scenes == (0,)


def test_prepare_length_mismatch():
    with pytest.raises(LengthMismatch):
        prepare_input(four_scene_script(), SaliencyLabels("m", (1, 0)))


_words = st.lists(st.sampled_from(["alpha", "beta", "gamma", "delta", "--"]), min_size=1, max_size=12)


@given(
    st.lists(_words, min_size=1, max_size=6),
    st.integers(min_value=1, max_value=40),
    st.data(),
)
@settings(max_examples=100)
def test_prepare_budget_is_hard_cap(bodies, budget, data):
    text = "\n".join(f"INT. S{i}\n{' '.join(body)}" for i, body in enumerate(bodies))
    script = parse_script(text, "m")
    labels = data.draw(
        st.lists(
            st.integers(min_value=0, max_value=1),
            min_size=script.n_scenes,
            max_size=script.n_scenes,
        )
    )
    prepared = prepare_input(
        script, SaliencyLabels("m", tuple(labels)), budget=budget, fallback="lead"
    )
    assert prepared.token_count <= budget
    assert prepared.token_count == len(tokenize(prepared.text))
    assert list(prepared.included_scenes) == sorted(prepared.included_scenes)


# --- run_pipeline ------------------------------------------------------------


def write_fixture_corpus(root):
    scripts = root / "scripts"
    summaries = root / "summaries"
    scripts.mkdir(parents=True)
    summaries.mkdir(parents=True)
    (scripts / "m1.txt").write_text(
        "INT. KITCHEN - DAY\nAnna cooks dinner slowly.\n"
        "EXT. GARDEN - NIGHT\nBen waters the roses.\n"
        "INT. HALL - DAY\nThey argue about money.\n"
    )
    (summaries / "m1.txt").write_text("Anna cooks dinner. They argue about money.")
    (scripts / "m2.txt").write_text(
        "INT. SHIP - DAY\nThe captain charts a course.\n"
        "EXT. SEA - STORM\nWaves crash over the deck.\n"
    )
    (summaries / "m2.txt").write_text("Waves crash over the deck.")


def test_pipeline_smoke_and_resume(tmp_path):
    write_fixture_corpus(tmp_path)
    out = tmp_path / "out"
    cfg = PipelineConfig(
        scripts_dir=str(tmp_path / "scripts"),
        summaries_dir=str(tmp_path / "summaries"),
        out_dir=str(out),
        method="rouge_l",
        budget=50,
    )
    first = run_pipeline(cfg)
    assert first.total_executed > 0
    for name in ("parsed", "alignments", "labels", "prepared"):
        assert (out / name).is_dir()
    assert json.loads((out / "alignments" / "m1.json").read_text())["method"] == "rouge_l"

    second = run_pipeline(cfg)
    assert second.total_executed == 0
    assert all(stage.skipped > 0 for stage in second.stages)

    # labels from the first run can serve as gold for an eval stage
    gold = tmp_path / "gold"
    shutil.copytree(out / "labels", gold)
    cfg.gold_labels_dir = str(gold)
    third = run_pipeline(cfg)
    assert [s.stage for s in third.stages] == ["parse", "align", "label", "prepare", "eval"]
    assert third.total_executed == 1  # only eval ran
    report = json.loads((out / "eval_report.json").read_text())
    assert report["f1"] == 1.0

    forced = run_pipeline(cfg)
    assert forced.total_executed == 0  # eval output now fresh too
    cfg.force = True
    assert run_pipeline(cfg).total_executed == 9  # 2 movies x 4 stages + eval


def test_pipeline_corrupt_embedding_names_stage_and_file(tmp_path):
    write_fixture_corpus(tmp_path)
    embeddings = tmp_path / "emb"
    embeddings.mkdir()
    rng = np.random.default_rng(0)
    for movie_id, n_scenes, n_sents in (("m1", 3, 2), ("m2", 2, 1)):
        write_embeddings(
            embeddings / f"{movie_id}.scene.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=rng.normal(size=(n_scenes, 4))),
            "scene",
        )
        write_embeddings(
            embeddings / f"{movie_id}.sent.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=rng.normal(size=(n_sents, 4))),
            "sentence",
        )
    corrupt = embeddings / "m1.scene.emb"
    corrupt.write_bytes(b"XXXX" + corrupt.read_bytes()[4:])
    cfg = PipelineConfig(
        scripts_dir=str(tmp_path / "scripts"),
        summaries_dir=str(tmp_path / "summaries"),
        out_dir=str(tmp_path / "out"),
        method="embed_monotonic",
        embeddings_dir=str(embeddings),
    )
    with pytest.raises(StageError) as excinfo:
        run_pipeline(cfg)
    assert excinfo.value.stage == "align"
    assert "m1.scene.emb" in str(excinfo.value)
    assert excinfo.value.exit_code == 2


def test_pipeline_embed_method_end_to_end(tmp_path):
    write_fixture_corpus(tmp_path)
    embeddings = tmp_path / "emb"
    embeddings.mkdir()
    rng = np.random.default_rng(1)
    for movie_id, n_scenes, n_sents in (("m1", 3, 2), ("m2", 2, 1)):
        scene_vectors = rng.normal(size=(n_scenes, 4))
        sent_vectors = scene_vectors[:n_sents] + rng.normal(scale=0.01, size=(n_sents, 4))
        write_embeddings(
            embeddings / f"{movie_id}.scene.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=scene_vectors),
            "scene",
        )
        write_embeddings(
            embeddings / f"{movie_id}.sent.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=sent_vectors),
            "sentence",
        )
    cfg = PipelineConfig(
        scripts_dir=str(tmp_path / "scripts"),
        summaries_dir=str(tmp_path / "summaries"),
        out_dir=str(tmp_path / "out"),
        method="embed_monotonic",
        embeddings_dir=str(embeddings),
        jobs=2,
    )
    report = run_pipeline(cfg)
    assert report.total_executed > 0
    alignment = json.loads((tmp_path / "out" / "alignments" / "m1.json").read_text())
    assert alignment["pairs"]["0"] == [0]
    assert alignment["pairs"]["1"] == [1]


def test_missing_summary_is_inconsistent(tmp_path):
    write_fixture_corpus(tmp_path)
    (tmp_path / "summaries" / "m2.txt").unlink()
    cfg = PipelineConfig(
        scripts_dir=str(tmp_path / "scripts"),
        summaries_dir=str(tmp_path / "summaries"),
        out_dir=str(tmp_path / "out"),
    )
    with pytest.raises(InconsistentCorpus):
        run_pipeline(cfg)


def test_prepared_input_dataclass_contract():
    prepared = PreparedInput(movie_id="m", text="", token_count=0, included_scenes=())
    assert prepared.token_count == 0
