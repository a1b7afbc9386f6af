"""``toolkit`` command line: parsing, alignment, selection, evaluation, serving.

Exit codes: 0 success, 1 validation error, 2 IO/format error, 3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import fileio
from .agreement import agreement_report, annotation_set_from_json, pool_annotation_sets
from .alignment import (
    SaliencyLabels,
    align_embed_argmax,
    align_embed_monotonic,
    align_greedy_r1,
    align_rouge_l,
    alignment_to_json,
    eval_saliency,
    labels_to_json,
    silver_labels,
)
from .embeddings import read_embeddings
from .errors import ToolkitError, ValidationError
from .parsing import (
    FRONTMATTER_HEADING,
    load_abbreviations,
    scenes_to_jsonl,
    summary_to_json,
    tokenize,
)
from .pipeline import PipelineConfig, corpus_stats, prepare_input, run_pipeline
from .rouge import rouge_l, rouge_n
from .selection import (
    ScorerConfig,
    TextRankConfig,
    build_features,
    kfold_eval,
    majority_select,
    predict_scorer,
    scorer_from_json,
    scorer_to_json,
    textrank_select,
    train_scorer,
)


def _emit(payload) -> None:
    print(json.dumps(payload, sort_keys=True, indent=2))


def _method_key(name: str) -> str:
    return name.replace("-", "_")


def _scene_embedding_files(directory) -> dict[str, Path]:
    directory = Path(directory)
    files = {p.name[: -len(".scene.emb")]: p for p in sorted(directory.glob("*.scene.emb"))}
    if not files:
        raise ValidationError(f"no *.scene.emb files in {directory}")
    return files


def _frontmatter_excludes(args) -> dict[str, frozenset[int]]:
    """Scene indices barred from selection: the FRONTMATTER pseudo-scene, if any."""
    if getattr(args, "include_frontmatter", False) or not getattr(args, "scripts", None):
        return {}
    scripts = fileio.load_scripts(args.scripts)
    return {
        movie_id: frozenset({0})
        for movie_id, script in scripts.items()
        if script.scenes[0].heading == FRONTMATTER_HEADING
    }


def cmd_parse(args) -> int:
    abbreviations = load_abbreviations(args.abbrev_file) if args.abbrev_file else None
    scripts = fileio.load_scripts(args.scripts, tuple(args.extra_prefix))
    summaries = fileio.load_summaries(args.summaries, abbreviations)
    fileio.require_same_movies(scripts, summaries, "scripts vs summaries")
    out = Path(args.out)
    for movie_id in sorted(scripts):
        fileio.atomic_write_text(out / f"{movie_id}.scenes.jsonl", scenes_to_jsonl(scripts[movie_id]))
        fileio.atomic_write_text(out / f"{movie_id}.summary.json", summary_to_json(summaries[movie_id]))
    print(f"parsed {len(scripts)} movies -> {out}")
    return 0


def cmd_align(args) -> int:
    method = _method_key(args.method)
    out = Path(args.out)
    if method in ("rouge_l", "greedy_r1"):
        scripts = fileio.load_scripts(args.scripts)
        summaries = fileio.load_summaries(args.summaries)
        fileio.require_same_movies(scripts, summaries, "scripts vs summaries")
        for movie_id in sorted(scripts):
            if method == "rouge_l":
                alignment = align_rouge_l(scripts[movie_id], summaries[movie_id], args.component)
            else:
                alignment = align_greedy_r1(scripts[movie_id], summaries[movie_id], args.component)
            fileio.atomic_write_text(out / f"{movie_id}.json", alignment_to_json(alignment))
        print(f"aligned {len(scripts)} movies ({method}) -> {out}")
        return 0
    if not args.embeddings:
        raise ValidationError(f"method {args.method} needs --embeddings")
    scene_files = _scene_embedding_files(args.embeddings)
    for movie_id, scene_path in scene_files.items():
        scene_emb, _ = read_embeddings(scene_path)
        sent_emb, _ = read_embeddings(Path(args.embeddings) / f"{movie_id}.sent.emb")
        if method == "embed_argmax":
            alignment = align_embed_argmax(scene_emb, sent_emb, args.threshold)
        else:
            alignment = align_embed_monotonic(scene_emb, sent_emb)
        fileio.atomic_write_text(out / f"{movie_id}.json", alignment_to_json(alignment))
    print(f"aligned {len(scene_files)} movies ({method}) -> {out}")
    return 0


def cmd_label(args) -> int:
    scripts = fileio.load_scripts(args.scripts)
    alignments = fileio.load_alignments(args.alignments)
    fileio.require_same_movies(scripts, alignments, "scripts vs alignments")
    out = Path(args.out)
    for movie_id in sorted(alignments):
        labels = silver_labels(alignments[movie_id], scripts[movie_id].n_scenes)
        fileio.atomic_write_text(out / f"{movie_id}.json", labels_to_json(labels))
    print(f"labeled {len(alignments)} movies -> {out}")
    return 0


def cmd_select(args) -> int:
    method = _method_key(args.method)
    scene_files = _scene_embedding_files(args.embeddings)
    excludes = _frontmatter_excludes(args)
    out = Path(args.out)
    model = None
    if method == "scorer":
        if not args.model:
            raise ValidationError("--method scorer needs --model FILE")
        model = scorer_from_json(Path(args.model).read_text(encoding="utf-8"), args.model)
    for movie_id, scene_path in scene_files.items():
        emb, _ = read_embeddings(scene_path)
        if method == "textrank":
            cfg = TextRankConfig(lambda1=args.lambda1, lambda2=1.0 - args.lambda1, k=args.k)
            if args.swap_lambdas:
                cfg = cfg.swapped()
            labels = textrank_select(emb, cfg, exclude=excludes.get(movie_id, frozenset()))
        elif method == "majority":
            labels = majority_select(emb.rows, movie_id)
        else:
            features = build_features(emb, model.context)
            labels = predict_scorer(model, features, movie_id, args.threshold)
            if movie_id in excludes:
                masked = list(labels.labels)
                for i in excludes[movie_id]:
                    masked[i] = 0
                labels = SaliencyLabels(movie_id, tuple(masked), labels.scores)
        fileio.atomic_write_text(out / f"{movie_id}.json", labels_to_json(labels))
    print(f"selected for {len(scene_files)} movies ({method}) -> {out}")
    return 0


def cmd_train_scorer(args) -> int:
    scene_files = _scene_embedding_files(args.embeddings)
    labels = fileio.load_labels(args.labels)
    fileio.require_same_movies(scene_files, labels, "embeddings vs labels")
    config = ScorerConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        positive_class_weight=args.pos_weight,
        context=args.context,
    )
    rows, targets = [], []
    for movie_id in sorted(scene_files):
        emb, _ = read_embeddings(scene_files[movie_id])
        rows.append(build_features(emb, config.context))
        targets.append(np.asarray(labels[movie_id].labels, dtype=np.float64))
    model = train_scorer(np.vstack(rows), np.concatenate(targets), config)
    fileio.atomic_write_text(args.out, scorer_to_json(model))
    print(
        f"trained scorer on {len(rows)} movies "
        f"(final loss {model.loss_history[-1]:.6f}) -> {args.out}"
    )
    return 0


def cmd_kfold(args) -> int:
    scene_files = _scene_embedding_files(args.embeddings)
    labels = fileio.load_labels(args.labels)
    fileio.require_same_movies(scene_files, labels, "embeddings vs labels")
    corpus = {}
    for movie_id in sorted(scene_files):
        emb, _ = read_embeddings(scene_files[movie_id])
        corpus[movie_id] = (emb, labels[movie_id])
    result = kfold_eval(
        corpus,
        k=args.k,
        method=_method_key(args.method),
        scorer_config=ScorerConfig(learning_rate=args.lr, epochs=args.epochs, context=args.context),
        threshold=args.threshold,
        seed=args.seed,
    )
    _emit(
        {
            "k": args.k,
            "method": args.method,
            "mean": {"precision": result.mean.precision, "recall": result.mean.recall, "f1": result.mean.f1},
            "std": {"precision": result.std.precision, "recall": result.std.recall, "f1": result.std.f1},
            "folds": [
                {"precision": m.precision, "recall": m.recall, "f1": m.f1} for m in result.per_fold
            ],
        }
    )
    return 0


def cmd_prepare(args) -> int:
    scripts = fileio.load_scripts(args.scripts)
    labels = fileio.load_labels(args.labels)
    fileio.require_same_movies(scripts, labels, "scripts vs labels")
    out = Path(args.out)
    for movie_id in sorted(scripts):
        embeddings = None
        if args.fallback == "textrank" and not any(labels[movie_id].labels):
            if not args.embeddings:
                raise ValidationError("--fallback textrank needs --embeddings")
            embeddings, _ = read_embeddings(Path(args.embeddings) / f"{movie_id}.scene.emb")
        prepared = prepare_input(
            scripts[movie_id],
            labels[movie_id],
            budget=args.budget,
            fallback=args.fallback,
            embeddings=embeddings,
            include_frontmatter=args.include_frontmatter,
        )
        fileio.atomic_write_text(out / f"{movie_id}.txt", prepared.text)
        fileio.atomic_write_text(
            out / f"{movie_id}.meta.json",
            json.dumps(
                {
                    "movie_id": movie_id,
                    "token_count": prepared.token_count,
                    "included_scenes": list(prepared.included_scenes),
                },
                sort_keys=True,
                indent=2,
            )
            + "\n",
        )
    print(f"prepared {len(scripts)} movies -> {out}")
    return 0


def cmd_rouge(args) -> int:
    candidate = tokenize(Path(args.candidate).read_text(encoding="utf-8"))
    reference = tokenize(Path(args.reference).read_text(encoding="utf-8"))
    report = {}
    for name in args.metrics.split(","):
        name = name.strip().lower()
        if name == "rl":
            score = rouge_l(candidate, reference)
        elif name.startswith("r") and name[1:].isdigit():
            score = rouge_n(candidate, reference, int(name[1:]))
        else:
            raise ValidationError(f"unknown metric {name!r} (use r1, r2, ..., rl)")
        report[name] = {"p": score.precision, "r": score.recall, "f1": score.f1}
    _emit(report)
    return 0


def cmd_agreement(args) -> int:
    directory = Path(args.annotations)
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ValidationError(f"no annotation files (*.json) in {directory}")
    pooled = pool_annotation_sets(
        annotation_set_from_json(p.read_text(encoding="utf-8"), str(p)) for p in paths
    )
    report = agreement_report(pooled)
    _emit({"ema": report.ema, "pa": report.pa, "mean_distance": report.mean_distance})
    return 0


def cmd_stats(args) -> int:
    scripts = fileio.load_scripts(args.scripts)
    summaries = fileio.load_summaries(args.summaries)
    alignments = fileio.load_alignments(args.alignments) if args.alignments else None
    _emit(corpus_stats(scripts, summaries, alignments).to_dict())
    return 0


def cmd_eval_saliency(args) -> int:
    pred = fileio.load_labels(args.pred)
    gold = fileio.load_labels(args.gold)
    result = eval_saliency(pred, gold)
    _emit({"precision": result.precision, "recall": result.recall, "f1": result.f1})
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(
        args.corpus,
        port=args.port,
        host=args.host,
        default_method=_method_key(args.default_method),
        store_dir=args.store,
        export_dir=args.export_dir,
        cors_origins=tuple(args.cors_origin),
    )
    return 0


def cmd_run(args) -> int:
    settings = {}
    if args.config:
        with open(args.config, "rb") as handle:
            settings = tomllib.load(handle)
        valid = {f.name for f in dataclasses.fields(PipelineConfig)}
        unknown = sorted(set(settings) - valid)
        if unknown:
            raise ValidationError(f"unknown config keys in {args.config}: {unknown}")
    overrides = {
        "scripts_dir": args.scripts,
        "summaries_dir": args.summaries,
        "out_dir": args.out,
        "method": _method_key(args.method) if args.method else None,
        "embeddings_dir": args.embeddings,
        "gold_labels_dir": args.gold_labels,
        "threshold": args.threshold,
        "budget": args.budget,
        "fallback": args.fallback,
        "jobs": args.jobs,
    }
    for key, value in overrides.items():
        if value is not None:
            settings[key] = value
    if args.force:
        settings["force"] = True
    for key in ("scripts_dir", "summaries_dir", "out_dir"):
        if key not in settings:
            raise ValidationError(f"missing required setting {key!r} (config key or flag)")
    cfg = PipelineConfig(**settings)
    report = run_pipeline(cfg)
    _emit(report.to_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toolkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="segment scripts into scenes, summaries into sentences")
    p.add_argument("--scripts", required=True)
    p.add_argument("--summaries", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--extra-prefix", action="append", default=[], help="extra slugline prefix")
    p.add_argument("--abbrev-file", help="file with one protected abbreviation per line")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("align", help="align summary sentences to scenes")
    p.add_argument("--method", required=True, choices=["rouge-l", "greedy-r1", "embed-argmax", "embed-monotonic"])
    p.add_argument("--scripts")
    p.add_argument("--summaries")
    p.add_argument("--embeddings")
    p.add_argument("--threshold", type=float, default=1.1)
    p.add_argument("--component", default=None, help="rouge-l: f1|recall, greedy-r1: recall|f1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_with_component_default)

    p = sub.add_parser("label", help="derive silver saliency labels from alignments")
    p.add_argument("--alignments", required=True)
    p.add_argument("--scripts", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("select", help="predict salient scenes from embeddings")
    p.add_argument("--method", required=True, choices=["textrank", "majority", "scorer"])
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda1", type=float, default=0.7)
    p.add_argument("--k", type=float, default=0.15)
    p.add_argument("--swap-lambdas", action="store_true", help="swap preceding/following weights")
    p.add_argument("--model", help="scorer model JSON")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--scripts", help="parsed scripts, used to exclude FRONTMATTER scenes")
    p.add_argument("--include-frontmatter", action="store_true")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train-scorer", help="train the linear saliency scorer")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--pos-weight", type=float, default=None)
    p.add_argument("--context", type=int, default=2)
    p.set_defaults(func=cmd_train_scorer)

    p = sub.add_parser("kfold", help="k-fold cross validation at movie level")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--method", default="scorer", choices=["scorer", "textrank", "majority"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--context", type=int, default=2)
    p.set_defaults(func=cmd_kfold)

    p = sub.add_parser("prepare", help="concatenate salient scenes under a token budget")
    p.add_argument("--scripts", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=16384)
    p.add_argument("--fallback", default="error", choices=["error", "lead", "textrank"])
    p.add_argument("--embeddings")
    p.add_argument("--include-frontmatter", action="store_true")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("rouge", help="score a candidate file against a reference file")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--metrics", default="r1,r2,rl")
    p.set_defaults(func=cmd_rouge)

    p = sub.add_parser("agreement", help="inter-annotator agreement over annotation files")
    p.add_argument("--annotations", required=True)
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--scripts", required=True)
    p.add_argument("--summaries", required=True)
    p.add_argument("--alignments")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval-saliency", help="macro PRF of predicted vs gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.set_defaults(func=cmd_eval_saliency)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--default-method", default="embed-monotonic",
                   choices=["rouge-l", "greedy-r1", "embed-argmax", "embed-monotonic"])
    p.add_argument("--store")
    p.add_argument("--export-dir")
    p.add_argument("--cors-origin", action="append", default=["*"])
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    p.add_argument("--config")
    p.add_argument("--scripts")
    p.add_argument("--summaries")
    p.add_argument("--out")
    p.add_argument("--method", choices=["rouge-l", "greedy-r1", "embed-argmax", "embed-monotonic"])
    p.add_argument("--embeddings")
    p.add_argument("--gold-labels")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--fallback", choices=["error", "lead", "textrank"], default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_run)

    return parser


def _with_component_default(args) -> int:
    if args.component is None:
        args.component = "f1" if args.method == "rouge-l" else "recall"
    if _method_key(args.method) in ("rouge_l", "greedy_r1") and not (args.scripts and args.summaries):
        raise ValidationError(f"method {args.method} needs --scripts and --summaries")
    return cmd_align(args)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
