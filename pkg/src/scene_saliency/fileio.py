"""Filesystem helpers: atomic writes and corpus directory loading.

Scripts load from raw ``.txt`` or parsed ``.scenes.jsonl``; summaries from raw
``.txt`` or parsed ``.summary.json``. Movie ids come from file stems.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

from .alignment import AlignmentMap, SaliencyLabels, alignment_from_json, labels_from_json
from .errors import InconsistentCorpus, ValidationError
from .parsing import (
    MovieScript,
    Summary,
    parse_script,
    script_from_jsonl,
    split_sentences,
    summary_from_json,
)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _movie_id_from(path: Path) -> str:
    name = path.name
    for suffix in (".scenes.jsonl", ".summary.json", ".txt", ".json", ".jsonl"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def load_scripts(directory, extra_prefixes: tuple[str, ...] = ()) -> dict[str, MovieScript]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"scripts directory not found: {directory}")
    scripts: dict[str, MovieScript] = {}
    for path in sorted(directory.iterdir()):
        if path.name.endswith(".scenes.jsonl") or path.suffix == ".jsonl":
            scripts[_movie_id_from(path)] = script_from_jsonl(
                path.read_text(encoding="utf-8"), source=str(path)
            )
        elif path.suffix == ".txt":
            movie_id = _movie_id_from(path)
            scripts[movie_id] = parse_script(
                path.read_text(encoding="utf-8"), movie_id, extra_prefixes
            )
    if not scripts:
        raise ValidationError(f"no script files (*.txt or *.scenes.jsonl) in {directory}")
    return scripts


def load_summaries(directory, abbreviations=None) -> dict[str, Summary]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"summaries directory not found: {directory}")
    summaries: dict[str, Summary] = {}
    for path in sorted(directory.iterdir()):
        if path.name.endswith(".summary.json") or path.suffix == ".json":
            summaries[_movie_id_from(path)] = summary_from_json(
                path.read_text(encoding="utf-8"), source=str(path)
            )
        elif path.suffix == ".txt":
            movie_id = _movie_id_from(path)
            text = path.read_text(encoding="utf-8")
            if abbreviations is not None:
                summaries[movie_id] = split_sentences(text, movie_id, abbreviations)
            else:
                summaries[movie_id] = split_sentences(text, movie_id)
    if not summaries:
        raise ValidationError(f"no summary files (*.txt or *.summary.json) in {directory}")
    return summaries


def load_alignments(directory) -> dict[str, AlignmentMap]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"alignments directory not found: {directory}")
    alignments: dict[str, AlignmentMap] = {}
    for path in sorted(directory.glob("*.json")):
        alignment = alignment_from_json(path.read_text(encoding="utf-8"), source=str(path))
        alignments[alignment.movie_id] = alignment
    if not alignments:
        raise ValidationError(f"no alignment files (*.json) in {directory}")
    return alignments


def load_labels(directory) -> dict[str, SaliencyLabels]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"labels directory not found: {directory}")
    labels: dict[str, SaliencyLabels] = {}
    for path in sorted(directory.glob("*.json")):
        entry = labels_from_json(path.read_text(encoding="utf-8"), source=str(path))
        labels[entry.movie_id] = entry
    if not labels:
        raise ValidationError(f"no label files (*.json) in {directory}")
    return labels


def require_same_movies(reference: dict, other: dict, what: str) -> None:
    if set(reference) != set(other):
        missing = sorted(set(reference) ^ set(other))
        raise InconsistentCorpus(f"{what}: movie ids differ on {missing}")
