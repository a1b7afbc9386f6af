"""``export-embeddings``: encode one parsed file into one EMB1 file."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .encoders import EncoderError
from .export import ExportJob, InputError, run_export


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="export-embeddings", description=__doc__)
    parser.add_argument("--input", required=True, help="parsed .scenes.jsonl or .summary.json")
    parser.add_argument("--unit", required=True, choices=["scene", "sentence"])
    parser.add_argument("--encoder", default="hash-384",
                        help="hash-<dim> or transformers:<model> (default hash-384)")
    parser.add_argument("--pooling", default="first", choices=["first", "mean"])
    parser.add_argument("--out", required=True, help="output .emb path (sidecar written beside it)")
    parser.add_argument("--no-headings", action="store_true",
                        help="encode scene bodies without their headings")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    job = ExportJob(
        input_path=Path(args.input),
        unit=args.unit,
        encoder=args.encoder,
        pooling=args.pooling,
        output_path=Path(args.out),
        include_headings=not args.no_headings,
    )
    try:
        rows = run_export(job)
    except EncoderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {rows} {args.unit} vectors -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
