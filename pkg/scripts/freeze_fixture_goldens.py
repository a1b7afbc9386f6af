#!/usr/bin/env python3
"""Freeze golden outputs for the fixture corpus.

Runs the toolkit over tests/fixtures/corpus and pins corpus statistics, the
two text-based alignments, and the evaluation of each alignment method
against the hand-labeled gold. The acceptance suite replays these files as a
regression gate.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from scene_saliency import fileio  # noqa: E402
from scene_saliency.alignment import (  # noqa: E402
    align_greedy_r1,
    align_rouge_l,
    alignment_to_json,
    eval_saliency,
    silver_labels,
)
from scene_saliency.pipeline import corpus_stats  # noqa: E402

CORPUS = ROOT / "tests" / "fixtures" / "corpus"
GOLDEN = CORPUS / "golden"


def main() -> None:
    scripts = fileio.load_scripts(CORPUS / "scripts")
    summaries = fileio.load_summaries(CORPUS / "summaries")
    gold_alignments = fileio.load_alignments(CORPUS / "gold_alignments")

    (GOLDEN / "alignments").mkdir(parents=True, exist_ok=True)

    stats = corpus_stats(scripts, summaries, gold_alignments)
    (GOLDEN / "stats.json").write_text(
        json.dumps(stats.to_dict(), sort_keys=True, indent=2) + "\n"
    )

    gold_labels = {
        mid: silver_labels(gold_alignments[mid], scripts[mid].n_scenes)
        for mid in sorted(scripts)
    }
    evaluation = {}
    for method, align in (("rouge_l", align_rouge_l), ("greedy_r1", align_greedy_r1)):
        predicted = {}
        for movie_id in sorted(scripts):
            alignment = align(scripts[movie_id], summaries[movie_id])
            (GOLDEN / "alignments" / f"{movie_id}.{method}.json").write_text(
                alignment_to_json(alignment)
            )
            predicted[movie_id] = silver_labels(alignment, scripts[movie_id].n_scenes)
        result = eval_saliency(predicted, gold_labels)
        evaluation[method] = {
            "precision": result.precision,
            "recall": result.recall,
            "f1": result.f1,
        }
    (GOLDEN / "eval.json").write_text(json.dumps(evaluation, sort_keys=True, indent=2) + "\n")
    print(json.dumps(evaluation, indent=2))
    print(f"goldens written to {GOLDEN}")


if __name__ == "__main__":
    main()
