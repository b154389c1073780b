"""Trainer CLI: `train` a model from a config file (flags override fields),
`predict` to export a logit matrix for a dataset.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, TrainConfig
from .data import FormatError, load_leaf_order, load_records
from .trainer import TrainingError, predict, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="persuasion-trainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune one model")
    p.add_argument("--config", help="TrainConfig JSON file")
    p.add_argument("--model-id")
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-sequence-length", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--toy-fraction", type=float)
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("predict", help="export a logit matrix")
    p.add_argument("--model-dir", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--hierarchy", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        leaf_order = load_leaf_order(args.hierarchy)
        records = load_records(args.dataset, leaf_order)
        if args.command == "train":
            overrides = {
                "model_id": args.model_id,
                "epochs": args.epochs,
                "learning_rate": args.learning_rate,
                "batch_size": args.batch_size,
                "max_sequence_length": args.max_sequence_length,
                "seed": args.seed,
                "toy_fraction": args.toy_fraction,
            }
            if args.config:
                cfg = TrainConfig.from_file(args.config, **overrides)
            else:
                clean = {k: v for k, v in overrides.items() if v is not None}
                if "model_id" not in clean:
                    raise ConfigError("--model-id (or --config) is required")
                cfg = TrainConfig(**clean)
            train(cfg, records, leaf_order, args.out_dir)
        else:
            predict(args.model_dir, records, leaf_order, args.out,
                    batch_size=args.batch_size)
        return 0
    except (ConfigError, FormatError) as exc:
        print(f"persuasion-trainer: {exc}", file=sys.stderr)
        return 1
    except (TrainingError, OSError) as exc:
        print(f"persuasion-trainer: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
