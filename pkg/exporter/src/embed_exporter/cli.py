"""embed-export: corpus in, pooled-embedding JSONL out.

Flags mirror ExporterConfig; --finetune enables the optional
classification fine-tuning stage before export.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExporterConfig, ExporterError
from .export import export_embeddings
from .finetune import finetune_then_export


def build_parser():
    parser = argparse.ArgumentParser(
        prog="embed-export",
        description="Export pooled sentence embeddings in the fusion JSONL format",
    )
    parser.add_argument("--input", required=True, help="corpus file (id/text/label)")
    parser.add_argument("--output", required=True, help="embedding JSONL path")
    parser.add_argument("--in-format", choices=("tsv", "csv"), default="tsv")
    parser.add_argument("--checkpoint", required=True,
                        help="model name or local checkpoint directory")
    parser.add_argument("--pooling", choices=("mean", "cls"), default="mean")
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--max-length", type=int, default=128)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--finetune", action="store_true",
                        help="fine-tune a classifier head before exporting")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--validate-every", type=int, default=600)
    parser.add_argument("--lr", type=float, default=2e-5)
    parser.add_argument("--patience", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--split-file",
                        help="JSON with train/validation id lists for fine-tuning")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExporterConfig(
            checkpoint=args.checkpoint,
            pooling=args.pooling,
            batch_size=args.batch_size,
            max_length=args.max_length,
            device=args.device,
        )
        if args.finetune:
            dim, count, best = finetune_then_export(
                args.input, config, args.output,
                epochs=args.epochs, validate_every=args.validate_every,
                lr=args.lr, patience=args.patience, seed=args.seed,
                split_file=args.split_file, corpus_format=args.in_format,
            )
            print(f"fine-tuned; best validation error {100 * best:.2f}%")
        else:
            dim, count = export_embeddings(
                args.input, config, args.output, corpus_format=args.in_format,
            )
        print(f"wrote {args.output}: {count} records, dim {dim}, "
              f"pooling {config.pooling}")
        return 0
    except ExporterError as exc:
        print(f"embed-export: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
