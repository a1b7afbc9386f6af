"""HTTP backend for the alignment-correction workflow.

Annotators see a default alignment per movie (computed once at startup) and
overwrite it sentence by sentence. Writes use optimistic concurrency: each
PUT carries the version it expects, stale writes get 409 instead of merging.
Persistence is one JSON file per movie, written atomically, so the store can
be inspected and diffed; exports are pure functions of the store.

Expected corpus layout: ``<corpus>/scripts``, ``<corpus>/summaries`` and,
for embedding-based default methods, ``<corpus>/embeddings`` holding
``<movie>.scene.emb`` / ``<movie>.sent.emb`` pairs.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import fileio
from .alignment import (
    AlignmentMap,
    align_embed_argmax,
    align_embed_monotonic,
    align_greedy_r1,
    align_rouge_l,
    alignment_to_json,
    labels_to_json,
    silver_labels,
)
from .embeddings import read_embeddings
from .errors import ValidationError
from .parsing import MovieScript, Summary

DEFAULT_METHODS = ("rouge_l", "greedy_r1", "embed_argmax", "embed_monotonic")


@dataclass(frozen=True)
class AnnotationRecord:
    scene_ids: tuple[int, ...]
    annotator: str
    version: int
    updated_at: str

    def to_dict(self) -> dict:
        return {
            "scene_ids": list(self.scene_ids),
            "annotator": self.annotator,
            "version": self.version,
            "updated_at": self.updated_at,
        }


class AnnotationStore:
    """One JSON file per movie; per-movie locks serialize writers."""

    def __init__(self, directory: Path):
        self.directory = directory
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._records: dict[str, dict[int, AnnotationRecord]] = {}
        for path in sorted(self.directory.glob("*.json")):
            payload = json.loads(path.read_text(encoding="utf-8"))
            self._records[payload["movie_id"]] = {
                int(idx): AnnotationRecord(
                    scene_ids=tuple(rec["scene_ids"]),
                    annotator=rec["annotator"],
                    version=rec["version"],
                    updated_at=rec["updated_at"],
                )
                for idx, rec in payload["records"].items()
            }

    def lock(self, movie_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(movie_id, threading.Lock())

    def records(self, movie_id: str) -> dict[int, AnnotationRecord]:
        return dict(self._records.get(movie_id, {}))

    def get(self, movie_id: str, sentence_idx: int) -> AnnotationRecord | None:
        return self._records.get(movie_id, {}).get(sentence_idx)

    def put(self, movie_id: str, sentence_idx: int, record: AnnotationRecord) -> None:
        self._records.setdefault(movie_id, {})[sentence_idx] = record
        payload = {
            "movie_id": movie_id,
            "records": {
                str(idx): rec.to_dict()
                for idx, rec in sorted(self._records[movie_id].items())
            },
        }
        fileio.atomic_write_text(
            self.directory / f"{movie_id}.json",
            json.dumps(payload, sort_keys=True, indent=2) + "\n",
        )


@dataclass(frozen=True)
class MovieState:
    script: MovieScript
    summary: Summary
    default_alignment: AlignmentMap


class AlignmentEdit(BaseModel):
    scene_ids: list[int]
    annotator: str
    expected_version: int


def _default_alignment(
    corpus_dir: Path, method: str, script: MovieScript, summary: Summary
) -> AlignmentMap:
    if method == "rouge_l":
        return align_rouge_l(script, summary)
    if method == "greedy_r1":
        return align_greedy_r1(script, summary)
    emb_dir = corpus_dir / "embeddings"
    scene_path = emb_dir / f"{script.movie_id}.scene.emb"
    sent_path = emb_dir / f"{script.movie_id}.sent.emb"
    if not scene_path.exists() or not sent_path.exists():
        raise ValidationError(
            f"{script.movie_id}: default method {method!r} needs {scene_path.name} and "
            f"{sent_path.name} under {emb_dir} (or pick a text-based --default-method)"
        )
    scene_emb, _ = read_embeddings(scene_path)
    sent_emb, _ = read_embeddings(sent_path)
    if scene_emb.rows != script.n_scenes or sent_emb.rows != summary.n_sentences:
        raise ValidationError(
            f"{script.movie_id}: embeddings have {scene_emb.rows} scene / "
            f"{sent_emb.rows} sentence rows but the corpus has "
            f"{script.n_scenes} scenes / {summary.n_sentences} sentences"
        )
    if method == "embed_argmax":
        return align_embed_argmax(scene_emb, sent_emb)
    return align_embed_monotonic(scene_emb, sent_emb)


def create_app(
    corpus_dir,
    default_method: str = "embed_monotonic",
    store_dir=None,
    export_dir=None,
    cors_origins: tuple[str, ...] = ("*",),
    extra_prefixes: tuple[str, ...] = (),
) -> FastAPI:
    if default_method not in DEFAULT_METHODS:
        raise ValidationError(f"default method must be one of {DEFAULT_METHODS}")
    corpus_dir = Path(corpus_dir)
    scripts = fileio.load_scripts(corpus_dir / "scripts", extra_prefixes)
    summaries = fileio.load_summaries(corpus_dir / "summaries")
    fileio.require_same_movies(scripts, summaries, "scripts vs summaries")

    movies: dict[str, MovieState] = {}
    for movie_id in sorted(scripts):
        movies[movie_id] = MovieState(
            script=scripts[movie_id],
            summary=summaries[movie_id],
            default_alignment=_default_alignment(
                corpus_dir, default_method, scripts[movie_id], summaries[movie_id]
            ),
        )

    store = AnnotationStore(Path(store_dir) if store_dir else corpus_dir / "annotation_store")
    exports = Path(export_dir) if export_dir else corpus_dir / "exports"

    app = FastAPI(title="scene-saliency annotation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.movies = movies
    app.state.store = store

    def movie_or_404(movie_id: str) -> MovieState:
        state = movies.get(movie_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown movie {movie_id!r}")
        return state

    def sentence_entry(state: MovieState, t: int) -> dict:
        record = store.get(state.script.movie_id, t)
        if record is not None:
            return {
                "sentence_idx": t,
                "scene_ids": list(record.scene_ids),
                "source": "human",
                "version": record.version,
                "annotator": record.annotator,
                "updated_at": record.updated_at,
            }
        return {
            "sentence_idx": t,
            "scene_ids": sorted(state.default_alignment.pairs.get(t, frozenset())),
            "source": "default",
            "version": 0,
            "annotator": None,
            "updated_at": None,
        }

    @app.get("/movies")
    def list_movies() -> list[dict]:
        out = []
        for movie_id, state in sorted(movies.items()):
            total = state.summary.n_sentences
            done = len(store.records(movie_id))
            out.append(
                {
                    "movie_id": movie_id,
                    "n_scenes": state.script.n_scenes,
                    "n_sentences": total,
                    "progress": done / total,
                }
            )
        return out

    @app.get("/movies/{movie_id}/alignment")
    def get_alignment(movie_id: str) -> dict:
        state = movie_or_404(movie_id)
        return {
            "movie_id": movie_id,
            "default_method": default_method,
            "sentences": [
                sentence_entry(state, t) for t in range(state.summary.n_sentences)
            ],
        }

    @app.get("/movies/{movie_id}/scenes")
    def get_scenes(movie_id: str) -> list[dict]:
        state = movie_or_404(movie_id)
        return [
            {
                "movie_id": movie_id,
                "index": scene.index,
                "heading": scene.heading,
                "body": scene.body,
                "token_count": scene.token_count,
            }
            for scene in state.script.scenes
        ]

    @app.get("/movies/{movie_id}/summary")
    def get_summary(movie_id: str) -> dict:
        state = movie_or_404(movie_id)
        return {"movie_id": movie_id, "sentences": list(state.summary.sentences)}

    @app.put("/movies/{movie_id}/alignment/{sentence_idx}")
    def put_alignment(movie_id: str, sentence_idx: int, edit: AlignmentEdit) -> dict:
        state = movie_or_404(movie_id)
        if not 0 <= sentence_idx < state.summary.n_sentences:
            raise HTTPException(status_code=404, detail=f"no sentence {sentence_idx}")
        n_scenes = state.script.n_scenes
        bad = [i for i in edit.scene_ids if not 0 <= i < n_scenes]
        if bad:
            raise HTTPException(
                status_code=422,
                detail=f"scene ids out of range [0, {n_scenes}): {sorted(bad)}",
            )
        with store.lock(movie_id):
            current = store.get(movie_id, sentence_idx)
            current_version = current.version if current else 0
            if edit.expected_version != current_version:
                raise HTTPException(
                    status_code=409,
                    detail=f"version conflict: stored {current_version}, "
                    f"expected_version {edit.expected_version}",
                )
            record = AnnotationRecord(
                scene_ids=tuple(sorted(set(edit.scene_ids))),
                annotator=edit.annotator,
                version=current_version + 1,
                updated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            )
            store.put(movie_id, sentence_idx, record)
        return {"movie_id": movie_id, **sentence_entry(state, sentence_idx)}

    @app.post("/movies/{movie_id}/export")
    def export_movie(movie_id: str, partial: bool = Query(default=False)) -> dict:
        state = movie_or_404(movie_id)
        records = store.records(movie_id)
        missing = [t for t in range(state.summary.n_sentences) if t not in records]
        if missing and not partial:
            raise HTTPException(
                status_code=409,
                detail=f"{len(missing)} sentences lack a human record: {missing[:20]}",
            )
        pairs = {t: frozenset(rec.scene_ids) for t, rec in sorted(records.items())}
        alignment = AlignmentMap(movie_id=movie_id, method="human", pairs=pairs)
        labels = silver_labels(alignment, state.script.n_scenes)
        alignment_text = alignment_to_json(alignment)
        labels_text = labels_to_json(labels)
        alignment_path = exports / f"{movie_id}.alignment.json"
        labels_path = exports / f"{movie_id}.labels.json"
        fileio.atomic_write_text(alignment_path, alignment_text)
        fileio.atomic_write_text(labels_path, labels_text)
        return {
            "alignment_path": str(alignment_path),
            "labels_path": str(labels_path),
            "alignment": json.loads(alignment_text),
            "labels": json.loads(labels_text),
            "warnings": [f"sentence {t} has no human record" for t in missing],
        }

    return app


def serve(
    corpus_dir,
    port: int = 8080,
    host: str = "127.0.0.1",
    default_method: str = "embed_monotonic",
    store_dir=None,
    export_dir=None,
    cors_origins: tuple[str, ...] = ("*",),
) -> None:
    import uvicorn

    app = create_app(
        corpus_dir,
        default_method=default_method,
        store_dir=store_dir,
        export_dir=export_dir,
        cors_origins=cors_origins,
    )
    uvicorn.run(app, host=host, port=port)
