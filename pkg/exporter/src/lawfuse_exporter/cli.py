"""Exporter commands: embed, train, score, relevance."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .encoders import EncoderLoadError, load_encoder
from .exporting import (
    export_embeddings,
    export_predicate_scores,
    export_relevance_scores,
)
from .formats import FormatError
from .scorer import (
    TrainConfig,
    load_pretraining_records,
    load_scorer,
    save_scorer,
    train_predicate_scorer,
)


def cmd_embed(args) -> int:
    encoder = load_encoder(args.encoder, seed=args.seed)
    manifest = export_embeddings(args.queries, args.cases, encoder, args.out)
    if args.manifest:
        manifest.write(args.manifest)
    print(f"wrote {manifest.records} vectors (dim {manifest.dim}) -> {args.out}")
    return 0


def cmd_train(args) -> int:
    records = load_pretraining_records(args.train_file)
    config = TrainConfig(
        batch_size=args.batch_size,
        lr=args.lr,
        epochs=args.epochs,
        hidden=args.hidden,
        max_len=args.max_len,
        val_fraction=args.val_fraction,
        seed=args.seed,
    )
    model, report = train_predicate_scorer(records, config)
    save_scorer(model, args.out)
    for key, value in report.as_dict().items():
        print(f"{key}: {value}")
    print(f"saved scorer -> {args.out}")
    return 0


def cmd_score(args) -> int:
    scorer = load_scorer(args.scorer)
    manifest = export_predicate_scores(
        args.queries, args.cases, args.qrels, args.rulebase, scorer, args.out
    )
    if args.manifest:
        manifest.write(args.manifest)
    print(f"wrote {manifest.records} predicate scores -> {args.out}")
    return 0


def cmd_relevance(args) -> int:
    encoder = load_encoder(args.encoder, seed=args.seed)
    manifest = export_relevance_scores(args.queries, args.cases, args.qrels, encoder, args.out)
    if args.manifest:
        manifest.write(args.manifest)
    print(f"wrote {manifest.records} relevance scores -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lawfuse-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="export sentence embeddings")
    p.add_argument("--queries", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--encoder", default="hash-256")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="fine-tune the predicate scorer with BCE")
    p.add_argument("--train-file", required=True)
    p.add_argument("--batch-size", type=int, default=24)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--max-len", type=int, default=256)
    p.add_argument("--val-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="export predicate satisfaction scores")
    p.add_argument("--queries", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--rulebase", required=True)
    p.add_argument("--scorer", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("relevance", help="export whole-document cosine relevance")
    p.add_argument("--queries", required=True)
    p.add_argument("--cases", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--encoder", default="hash-256")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_relevance)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EncoderLoadError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
