#!/usr/bin/env python3
"""Generate the small fixture corpus used by the test suite.

Writes raw scripts, summaries, hand-labeled gold alignments, triple
annotations, and deterministic bag-of-words embeddings under
tests/fixtures/corpus. Everything is seeded, so reruns are byte-stable.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from scene_saliency.alignment import AlignmentMap, alignment_to_json  # noqa: E402
from scene_saliency.embeddings import EmbeddingMatrix, write_embeddings  # noqa: E402
from scene_saliency.parsing import parse_script, scene_text, split_sentences  # noqa: E402

CORPUS = ROOT / "tests" / "fixtures" / "corpus"

EMBED_DIM = 24

MOVIES = {
    "harbor_lights": {
        "script": "\n".join(
            [
                "INT. LIGHTHOUSE - NIGHT",
                "Keeper Elias trims the lamp wick and watches the fog roll in.",
                "EXT. HARBOR - DAWN",
                "Fishing boats crowd the narrow pier. Nets drip with silver herring.",
                "INT. TAVERN - NIGHT",
                "Sailors trade rumors about a ghost ship off the northern shoals.",
                "EXT. SEA - STORM",
                "Thunder splits the sky. The ghost ship appears through sheets of rain.",
                "INT. LIGHTHOUSE - LATER",
                "Elias signals the stranded crew with the great lamp.",
                "EXT. BEACH - MORNING",
                "Survivors wade ashore. Elias counts every man saved from the wreck.",
            ]
        ),
        "summary": (
            "Keeper Elias tends the lighthouse lamp above a fogbound harbor. "
            "Sailors whisper about a ghost ship near the northern shoals. "
            "When the storm drives the ghost ship onto the rocks, Elias signals "
            "the crew with his lamp. Every survivor reaches the beach alive."
        ),
        "gold": {0: [0], 1: [2], 2: [3, 4], 3: [5]},
        "annotations": [
            {"idx": 0, "A": [0], "B": [0], "C": [0]},
            {"idx": 1, "A": [2], "B": [2], "C": [2, 3]},
            {"idx": 2, "A": [3, 4], "B": [3, 4], "C": [4]},
            {"idx": 3, "A": [5], "B": [5], "C": [4]},
        ],
    },
    "clockwork_heist": {
        "script": "\n".join(
            [
                "CLOCKWORK HEIST",
                "written by",
                "A. Nonymous",
                "INT. MUSEUM VAULT - NIGHT",
                "The brass automaton guards the emerald crown behind laser grids.",
                "EXT. ROOFTOP - NIGHT",
                "Vera studies the blueprints one last time under moonlight.",
                "INT. VENT SHAFT - CONTINUOUS",
                "She crawls past humming sensors with the drill strapped to her back.",
                "INT. MUSEUM VAULT - NIGHT",
                "The drill whines. The automaton's gears begin to turn.",
                "INT. MUSEUM VAULT - MOMENTS LATER",
                "Vera waltzes with the automaton, slipping the crown from its head.",
                "EXT. ROOFTOP - DAWN",
                "Alarms wail below. Vera vanishes across the skyline with the crown.",
                "INT. PAWN SHOP - DAY",
                "The fence weighs the emerald crown and laughs at the morning news.",
            ]
        ),
        "summary": (
            "Vera plans a museum heist from a rooftop with stolen blueprints. "
            "She crawls through a vent shaft past the sensors. "
            "She tricks the brass automaton and takes the emerald crown. "
            "By dawn she escapes across the skyline."
        ),
        "gold": {0: [1, 2], 1: [3], 2: [4, 5], 3: [5, 6]},
        "annotations": [
            {"idx": 0, "A": [1, 2], "B": [2], "C": [1, 2]},
            {"idx": 1, "A": [3], "B": [3], "C": [3]},
            {"idx": 2, "A": [4, 5], "B": [5], "C": [4, 5]},
            {"idx": 3, "A": [5, 6], "B": [6, 7], "C": [6]},
        ],
    },
    "desert_mail": {
        "script": "\n\n\n".join(
            [
                "The mail rider Tove leaves the depot before sunrise with two heavy bags.",
                "A sandstorm swallows the canyon trail. Tove shelters beneath a rock ledge.",
                "Bandits watch the pass. Tove trades her spare horse for safe passage.",
                "Tove waters the remaining horse at a dry well and mends a torn strap.",
                "At dusk the village bell rings. Every letter reaches its door.",
            ]
        ),
        "summary": (
            "Tove rides out with heavy mailbags before sunrise. "
            "A sandstorm traps her in the canyon. "
            "She bargains with bandits at the pass. "
            "The mail arrives by dusk."
        ),
        "gold": {0: [0], 1: [1], 2: [2], 3: [4]},
        "annotations": [
            {"idx": 0, "A": [0], "B": [0], "C": [0]},
            {"idx": 1, "A": [1], "B": [1], "C": [1]},
            {"idx": 2, "A": [2], "B": [2], "C": [1, 2]},
            {"idx": 3, "A": [4], "B": [4], "C": [4]},
        ],
    },
}


def token_vector(token: str) -> np.ndarray:
    digest = hashlib.md5(token.encode("utf-8")).digest()
    seed = int.from_bytes(digest[:8], "little")
    return np.random.default_rng(seed).normal(size=EMBED_DIM)


def embed_texts(texts: list[str]) -> np.ndarray:
    from scene_saliency.parsing import tokenize

    rows = []
    for text in texts:
        tokens = tokenize(text)
        if tokens:
            vec = np.mean([token_vector(t) for t in tokens], axis=0)
        else:
            vec = np.zeros(EMBED_DIM)
        norm = np.linalg.norm(vec)
        rows.append(vec / norm if norm else vec)
    return np.asarray(rows)


def main() -> None:
    for sub in ("scripts", "summaries", "gold_alignments", "annotations", "embeddings"):
        (CORPUS / sub).mkdir(parents=True, exist_ok=True)

    for movie_id, spec in MOVIES.items():
        (CORPUS / "scripts" / f"{movie_id}.txt").write_text(spec["script"] + "\n")
        (CORPUS / "summaries" / f"{movie_id}.txt").write_text(spec["summary"] + "\n")

        gold = AlignmentMap(
            movie_id=movie_id,
            method="human",
            pairs={t: frozenset(v) for t, v in spec["gold"].items()},
        )
        (CORPUS / "gold_alignments" / f"{movie_id}.json").write_text(alignment_to_json(gold))

        (CORPUS / "annotations" / f"{movie_id}.json").write_text(
            json.dumps(
                {"movie_id": movie_id, "sentences": spec["annotations"]},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )

        script = parse_script(spec["script"], movie_id)
        summary = split_sentences(spec["summary"], movie_id)
        scene_vectors = embed_texts([scene_text(s) for s in script.scenes])
        sent_vectors = embed_texts(list(summary.sentences))
        write_embeddings(
            CORPUS / "embeddings" / f"{movie_id}.scene.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=scene_vectors),
            "scene",
        )
        write_embeddings(
            CORPUS / "embeddings" / f"{movie_id}.sent.emb",
            EmbeddingMatrix(movie_id=movie_id, vectors=sent_vectors),
            "sentence",
        )
        print(f"{movie_id}: {script.n_scenes} scenes, {summary.n_sentences} sentences")

    print(f"fixture corpus written to {CORPUS}")


if __name__ == "__main__":
    main()
