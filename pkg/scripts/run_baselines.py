#!/usr/bin/env python3
"""Evaluate the saliency baselines on the fixture corpus and print a table.

Usage: python scripts/run_baselines.py [CORPUS_DIR]

CORPUS_DIR defaults to tests/fixtures/corpus and must contain scripts/,
summaries/, gold_alignments/ and embeddings/ in the toolkit's formats.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from scene_saliency import fileio  # noqa: E402
from scene_saliency.alignment import eval_saliency, silver_labels  # noqa: E402
from scene_saliency.embeddings import read_embeddings  # noqa: E402
from scene_saliency.selection import (  # noqa: E402
    ScorerConfig,
    TextRankConfig,
    kfold_eval,
    majority_select,
    textrank_select,
)


def main() -> None:
    corpus_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "fixtures" / "corpus"
    scripts = fileio.load_scripts(corpus_dir / "scripts")
    gold_alignments = fileio.load_alignments(corpus_dir / "gold_alignments")
    gold = {
        mid: silver_labels(gold_alignments[mid], scripts[mid].n_scenes)
        for mid in sorted(scripts)
    }
    embeddings = {
        mid: read_embeddings(corpus_dir / "embeddings" / f"{mid}.scene.emb")[0]
        for mid in sorted(scripts)
    }

    rows = []
    majority = {mid: majority_select(scripts[mid].n_scenes, mid) for mid in gold}
    rows.append(("majority", eval_saliency(majority, gold)))

    for name, cfg in (
        ("textrank l1=0.7", TextRankConfig(lambda1=0.7, lambda2=0.3, k=0.3)),
        ("textrank l1=0.3", TextRankConfig(lambda1=0.3, lambda2=0.7, k=0.3)),
    ):
        picked = {mid: textrank_select(embeddings[mid], cfg) for mid in gold}
        rows.append((name, eval_saliency(picked, gold)))

    k = min(len(gold), 5)
    folds = kfold_eval(
        {mid: (embeddings[mid], gold[mid]) for mid in gold},
        k=k,
        method="scorer",
        scorer_config=ScorerConfig(learning_rate=0.5, epochs=400),
    )
    rows.append((f"scorer ({k}-fold)", folds.mean))

    print(f"{'method':<18} {'P':>7} {'R':>7} {'F1':>7}")
    for name, m in rows:
        print(f"{name:<18} {m.precision * 100:7.2f} {m.recall * 100:7.2f} {m.f1 * 100:7.2f}")


if __name__ == "__main__":
    main()
