"""Corpus statistics, salient-scene input preparation, and the staged pipeline.

``run_pipeline`` chains parse -> align -> label -> prepare (-> eval when gold
labels are supplied). Every stage writes its files atomically and is skipped
when the output is newer than all of its inputs, so reruns are cheap;
``force`` disables the skipping.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import fileio
from .alignment import (
    AlignmentMap,
    SaliencyLabels,
    align_embed_argmax,
    align_embed_monotonic,
    align_greedy_r1,
    align_rouge_l,
    alignment_from_json,
    alignment_to_json,
    eval_saliency,
    labels_from_json,
    labels_to_json,
    silver_labels,
)
from .embeddings import EmbeddingMatrix, read_embeddings
from .errors import (
    InconsistentCorpus,
    LengthMismatch,
    NoSalientScenes,
    StageError,
    ValidationError,
)
from .parsing import (
    FRONTMATTER_HEADING,
    SCENE_SEPARATOR,
    MovieScript,
    Summary,
    parse_script,
    scene_text,
    scenes_to_jsonl,
    script_from_jsonl,
    split_sentences,
    summary_from_json,
    summary_to_json,
    tokenize,
)
from .selection import TextRankConfig, textrank_select


@dataclass(frozen=True)
class StatsReport:
    n_movies: int
    n_scenes: int
    n_sentences: int
    n_alignment_pairs: int
    n_salient_scenes: int
    mean_script_tokens: float
    mean_summary_tokens: float

    def __post_init__(self):
        counts = (
            self.n_movies, self.n_scenes, self.n_sentences,
            self.n_alignment_pairs, self.n_salient_scenes,
        )
        if any(c < 0 for c in counts) or min(self.mean_script_tokens, self.mean_summary_tokens) < 0:
            raise ValidationError("corpus statistics must be non-negative")
        if self.n_salient_scenes > self.n_scenes:
            raise ValidationError(
                f"{self.n_salient_scenes} salient scenes exceed {self.n_scenes} total"
            )

    def to_dict(self) -> dict:
        return {
            "n_movies": self.n_movies,
            "n_scenes": self.n_scenes,
            "n_sentences": self.n_sentences,
            "n_alignment_pairs": self.n_alignment_pairs,
            "n_salient_scenes": self.n_salient_scenes,
            "mean_script_tokens": self.mean_script_tokens,
            "mean_summary_tokens": self.mean_summary_tokens,
        }


def corpus_stats(
    scripts: dict[str, MovieScript],
    summaries: dict[str, Summary],
    alignments: dict[str, AlignmentMap] | None = None,
) -> StatsReport:
    """Counts and whitespace-token means over a corpus.

    The pair count is the sum of aligned-scene set sizes over sentences; the
    salient count is the number of distinct aligned scenes per movie, summed.
    """
    if not scripts:
        raise InconsistentCorpus("empty corpus")
    fileio.require_same_movies(scripts, summaries, "scripts vs summaries")
    if alignments is not None:
        fileio.require_same_movies(scripts, alignments, "scripts vs alignments")

    n_pairs = 0
    n_salient = 0
    if alignments is not None:
        for movie_id in sorted(alignments):
            alignment = alignments[movie_id]
            n_scenes = scripts[movie_id].n_scenes
            covered: set[int] = set()
            for scene_ids in alignment.pairs.values():
                for scene in scene_ids:
                    if scene >= n_scenes:
                        raise InconsistentCorpus(
                            f"{movie_id}: alignment references scene {scene} "
                            f"but the script has {n_scenes}"
                        )
                covered.update(scene_ids)
                n_pairs += len(scene_ids)
            n_salient += len(covered)

    movie_ids = sorted(scripts)
    script_tokens = [sum(s.token_count for s in scripts[m].scenes) for m in movie_ids]
    summary_tokens = [len(tokenize(" ".join(summaries[m].sentences))) for m in movie_ids]
    return StatsReport(
        n_movies=len(movie_ids),
        n_scenes=sum(scripts[m].n_scenes for m in movie_ids),
        n_sentences=sum(summaries[m].n_sentences for m in movie_ids),
        n_alignment_pairs=n_pairs,
        n_salient_scenes=n_salient,
        mean_script_tokens=sum(script_tokens) / len(movie_ids),
        mean_summary_tokens=sum(summary_tokens) / len(movie_ids),
    )


@dataclass(frozen=True)
class PreparedInput:
    movie_id: str
    text: str
    token_count: int
    included_scenes: tuple[int, ...]


def _truncate_to_tokens(text: str, max_tokens: int) -> tuple[str, int]:
    """Keep leading whitespace-words until max_tokens countable tokens are used."""
    kept: list[str] = []
    used = 0
    for word in text.split():
        contributes = len(tokenize(word))
        if used + contributes > max_tokens:
            break
        kept.append(word)
        used += contributes
        if used == max_tokens:
            break
    return " ".join(kept), used


FALLBACKS = ("error", "lead", "textrank")


def prepare_input(
    script: MovieScript,
    labels: SaliencyLabels,
    budget: int | None = 16384,
    fallback: str = "error",
    embeddings: EmbeddingMatrix | None = None,
    textrank_config: TextRankConfig | None = None,
    include_frontmatter: bool = False,
) -> PreparedInput:
    """Concatenate salient scenes in order, truncating at a token boundary.

    ``budget`` of None means unlimited. When no scene is salient, ``fallback``
    decides: raise, take leading scenes, or rank scenes by centrality (needs
    ``embeddings``). Fallback selection skips a FRONTMATTER pseudo-scene
    unless ``include_frontmatter`` is set; explicit labels are always honored.
    """
    if fallback not in FALLBACKS:
        raise ValidationError(f"fallback must be one of {FALLBACKS}, got {fallback!r}")
    if budget is not None and budget < 1:
        raise ValidationError(f"budget must be >= 1, got {budget}")
    if labels.n_scenes != script.n_scenes:
        raise LengthMismatch(
            f"{script.movie_id}: {labels.n_scenes} labels for {script.n_scenes} scenes"
        )

    def eligible(index: int) -> bool:
        if include_frontmatter:
            return True
        scene = script.scenes[index]
        return not (scene.index == 0 and scene.heading == FRONTMATTER_HEADING)

    salient = list(labels.salient_indices)
    if not salient:
        if fallback == "error":
            raise NoSalientScenes(f"{script.movie_id}: no salient scene and fallback=error")
        if fallback == "lead":
            salient = [i for i in range(script.n_scenes) if eligible(i)]
        else:
            if embeddings is None:
                raise ValidationError(
                    f"{script.movie_id}: textrank fallback needs scene embeddings"
                )
            exclude = frozenset(i for i in range(script.n_scenes) if not eligible(i))
            picked = textrank_select(embeddings, textrank_config, exclude=exclude)
            salient = list(picked.salient_indices)

    parts: list[str] = []
    included: list[int] = []
    used = 0
    limit = math.inf if budget is None else budget
    for index in salient:
        text = scene_text(script.scenes[index])
        count = len(tokenize(text))
        if used + count <= limit:
            parts.append(text)
            included.append(index)
            used += count
        else:
            remaining = int(limit - used)
            if remaining > 0:
                truncated, got = _truncate_to_tokens(text, remaining)
                if truncated:
                    parts.append(truncated)
                    included.append(index)
                    used += got
            break
    return PreparedInput(
        movie_id=script.movie_id,
        text=SCENE_SEPARATOR.join(parts),
        token_count=used,
        included_scenes=tuple(included),
    )


@dataclass
class PipelineConfig:
    scripts_dir: str
    summaries_dir: str
    out_dir: str
    method: str = "rouge_l"
    embeddings_dir: str | None = None
    gold_labels_dir: str | None = None
    threshold: float = 1.1
    lambda1: float = 0.7
    k: float = 0.15
    budget: int = 16384
    fallback: str = "lead"
    jobs: int = 1
    force: bool = False
    extra_prefixes: tuple[str, ...] = ()


@dataclass(frozen=True)
class StageReport:
    stage: str
    executed: int
    skipped: int


@dataclass
class PipelineReport:
    stages: list[StageReport] = field(default_factory=list)

    @property
    def total_executed(self) -> int:
        return sum(s.executed for s in self.stages)

    def to_dict(self) -> dict:
        return {s.stage: {"executed": s.executed, "skipped": s.skipped} for s in self.stages}


def _fresh(output: Path, inputs: list[Path]) -> bool:
    if not output.exists():
        return False
    out_mtime = output.stat().st_mtime
    return all(inp.exists() and inp.stat().st_mtime <= out_mtime for inp in inputs)


def _run_stage(name: str, jobs: int, tasks: list[Callable[[], bool]]) -> StageReport:
    """Run per-movie tasks (each returns True when it executed, False when skipped)."""
    try:
        if jobs <= 1 or len(tasks) <= 1:
            results = [task() for task in tasks]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = [f.result() for f in [pool.submit(t) for t in tasks]]
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    return StageReport(name, executed=sum(results), skipped=len(results) - sum(results))


def _scene_emb_path(cfg: PipelineConfig, movie_id: str) -> Path:
    return Path(cfg.embeddings_dir or "") / f"{movie_id}.scene.emb"


def _sent_emb_path(cfg: PipelineConfig, movie_id: str) -> Path:
    return Path(cfg.embeddings_dir or "") / f"{movie_id}.sent.emb"


def _load_script_file(path: Path, movie_id: str, extra_prefixes: tuple[str, ...]) -> MovieScript:
    text = path.read_text(encoding="utf-8")
    if path.name.endswith(".jsonl"):
        return script_from_jsonl(text, str(path))
    return parse_script(text, movie_id, extra_prefixes)


def _load_summary_file(path: Path, movie_id: str) -> Summary:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        return summary_from_json(text, str(path))
    return split_sentences(text, movie_id)


def _align_movie(cfg: PipelineConfig, movie_id: str, script: MovieScript, summary: Summary) -> AlignmentMap:
    if cfg.method == "rouge_l":
        return align_rouge_l(script, summary)
    if cfg.method == "greedy_r1":
        return align_greedy_r1(script, summary)
    if cfg.method in ("embed_argmax", "embed_monotonic"):
        scene_emb, _ = read_embeddings(_scene_emb_path(cfg, movie_id))
        sent_emb, _ = read_embeddings(_sent_emb_path(cfg, movie_id))
        if cfg.method == "embed_argmax":
            return align_embed_argmax(scene_emb, sent_emb, cfg.threshold)
        return align_embed_monotonic(scene_emb, sent_emb)
    raise ValidationError(f"unknown alignment method {cfg.method!r}")


def run_pipeline(cfg: PipelineConfig) -> PipelineReport:
    """Run all stages over the corpus; returns per-stage executed/skipped counts."""
    out = Path(cfg.out_dir)
    scripts_dir = Path(cfg.scripts_dir)
    summaries_dir = Path(cfg.summaries_dir)
    parsed_dir = out / "parsed"
    align_dir = out / "alignments"
    labels_dir = out / "labels"
    prepared_dir = out / "prepared"

    script_files = sorted(scripts_dir.glob("*.txt")) + sorted(scripts_dir.glob("*.scenes.jsonl"))
    if not script_files:
        raise StageError("parse", ValidationError(f"no script files in {scripts_dir}"))
    movie_ids = sorted({fileio._movie_id_from(p) for p in script_files})

    def script_source(movie_id: str) -> Path:
        for candidate in (scripts_dir / f"{movie_id}.txt", scripts_dir / f"{movie_id}.scenes.jsonl"):
            if candidate.exists():
                return candidate
        raise InconsistentCorpus(f"no script file for movie {movie_id!r}")

    def summary_source(movie_id: str) -> Path:
        for candidate in (
            summaries_dir / f"{movie_id}.txt",
            summaries_dir / f"{movie_id}.summary.json",
            summaries_dir / f"{movie_id}.json",
        ):
            if candidate.exists():
                return candidate
        raise InconsistentCorpus(f"no summary file for movie {movie_id!r} in {summaries_dir}")

    report = PipelineReport()

    def parse_task(movie_id: str) -> Callable[[], bool]:
        src, ssrc = script_source(movie_id), summary_source(movie_id)
        scenes_out = parsed_dir / f"{movie_id}.scenes.jsonl"
        summary_out = parsed_dir / f"{movie_id}.summary.json"

        def run() -> bool:
            ran = False
            if cfg.force or not _fresh(scenes_out, [src]):
                fileio.atomic_write_text(
                    scenes_out, scenes_to_jsonl(_load_script_file(src, movie_id, cfg.extra_prefixes))
                )
                ran = True
            if cfg.force or not _fresh(summary_out, [ssrc]):
                fileio.atomic_write_text(summary_out, summary_to_json(_load_summary_file(ssrc, movie_id)))
                ran = True
            return ran

        return run

    report.stages.append(_run_stage("parse", cfg.jobs, [parse_task(m) for m in movie_ids]))

    def align_task(movie_id: str) -> Callable[[], bool]:
        scenes_in = parsed_dir / f"{movie_id}.scenes.jsonl"
        summary_in = parsed_dir / f"{movie_id}.summary.json"
        align_out = align_dir / f"{movie_id}.json"
        inputs = [scenes_in, summary_in]
        if cfg.method.startswith("embed"):
            inputs += [_scene_emb_path(cfg, movie_id), _sent_emb_path(cfg, movie_id)]

        def run() -> bool:
            if not cfg.force and _fresh(align_out, inputs):
                return False
            script = script_from_jsonl(scenes_in.read_text(encoding="utf-8"), str(scenes_in))
            summary = summary_from_json(summary_in.read_text(encoding="utf-8"), str(summary_in))
            alignment = _align_movie(cfg, movie_id, script, summary)
            fileio.atomic_write_text(align_out, alignment_to_json(alignment))
            return True

        return run

    report.stages.append(_run_stage("align", cfg.jobs, [align_task(m) for m in movie_ids]))

    def label_task(movie_id: str) -> Callable[[], bool]:
        align_in = align_dir / f"{movie_id}.json"
        scenes_in = parsed_dir / f"{movie_id}.scenes.jsonl"
        labels_out = labels_dir / f"{movie_id}.json"

        def run() -> bool:
            if not cfg.force and _fresh(labels_out, [align_in, scenes_in]):
                return False
            script = script_from_jsonl(scenes_in.read_text(encoding="utf-8"), str(scenes_in))
            alignment = alignment_from_json(align_in.read_text(encoding="utf-8"), str(align_in))
            fileio.atomic_write_text(labels_out, labels_to_json(silver_labels(alignment, script.n_scenes)))
            return True

        return run

    report.stages.append(_run_stage("label", cfg.jobs, [label_task(m) for m in movie_ids]))

    def prepare_task(movie_id: str) -> Callable[[], bool]:
        scenes_in = parsed_dir / f"{movie_id}.scenes.jsonl"
        labels_in = labels_dir / f"{movie_id}.json"
        text_out = prepared_dir / f"{movie_id}.txt"
        meta_out = prepared_dir / f"{movie_id}.meta.json"

        def run() -> bool:
            inputs = [scenes_in, labels_in]
            if not cfg.force and _fresh(text_out, inputs) and _fresh(meta_out, inputs):
                return False
            script = script_from_jsonl(scenes_in.read_text(encoding="utf-8"), str(scenes_in))
            labels = labels_from_json(labels_in.read_text(encoding="utf-8"), str(labels_in))
            embeddings = None
            if cfg.fallback == "textrank" and not any(labels.labels):
                embeddings, _ = read_embeddings(_scene_emb_path(cfg, movie_id))
            prepared = prepare_input(
                script,
                labels,
                budget=cfg.budget,
                fallback=cfg.fallback,
                embeddings=embeddings,
                textrank_config=TextRankConfig(
                    lambda1=cfg.lambda1, lambda2=1.0 - cfg.lambda1, k=cfg.k
                ),
            )
            fileio.atomic_write_text(text_out, prepared.text)
            fileio.atomic_write_text(
                meta_out,
                json.dumps(
                    {
                        "movie_id": prepared.movie_id,
                        "token_count": prepared.token_count,
                        "included_scenes": list(prepared.included_scenes),
                    },
                    sort_keys=True,
                    indent=2,
                )
                + "\n",
            )
            return True

        return run

    report.stages.append(_run_stage("prepare", cfg.jobs, [prepare_task(m) for m in movie_ids]))

    if cfg.gold_labels_dir:
        eval_out = out / "eval_report.json"
        label_files = [labels_dir / f"{movie_id}.json" for movie_id in movie_ids]
        gold_files = sorted(Path(cfg.gold_labels_dir).glob("*.json"))

        def eval_all() -> bool:
            if not cfg.force and _fresh(eval_out, label_files + gold_files):
                return False
            pred = fileio.load_labels(labels_dir)
            gold = fileio.load_labels(cfg.gold_labels_dir)
            result = eval_saliency(pred, gold)
            fileio.atomic_write_text(
                eval_out,
                json.dumps(
                    {"precision": result.precision, "recall": result.recall, "f1": result.f1},
                    sort_keys=True,
                    indent=2,
                )
                + "\n",
            )
            return True

        report.stages.append(_run_stage("eval", 1, [eval_all]))

    return report
