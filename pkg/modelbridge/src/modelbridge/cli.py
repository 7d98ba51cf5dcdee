"""Command line interface: prepare-data, train, export, evaluate, classify."""

from __future__ import annotations

import argparse
import json
import sys

from . import dataset, features, train
from .splits import SPLITS, get_split


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelbridge",
        description="Split-model feature export and Top-1 scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-data", help="render the bundled digit scans to PNG trees")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--train-per-class", type=int, default=140)
    p.add_argument("--eval-per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train a checkpoint on a labeled image directory")
    p.add_argument("--data", required=True, help="image dir with labels.csv")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--eval-data", help="optional eval image dir")
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--num-classes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("export", help="export split feature tensors to NPY + manifest")
    p.add_argument("--images", required=True, help="image dir with labels.csv")
    p.add_argument("--split", choices=sorted(SPLITS), default="layer1")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("evaluate", help="score Top-1 of feature tensors via the back end")
    p.add_argument("--tensors", required=True, help="dir of <tensor_id>.npy files")
    p.add_argument("--split", choices=sorted(SPLITS), default="layer1")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--manifest", required=True, help="CSV tensor_id,label")

    p = sub.add_parser("classify", help="unsplit reference Top-1 on a labeled image dir")
    p.add_argument("--images", required=True)
    p.add_argument("--ckpt", required=True)

    return parser


def _cmd_prepare_data(args) -> int:
    counts = dataset.prepare_digits(
        args.out_dir,
        train_per_class=args.train_per_class,
        eval_per_class=args.eval_per_class,
        seed=args.seed,
    )
    print(json.dumps(counts))
    return 0


def _cmd_train(args) -> int:
    result = train.train_model(
        args.data,
        args.out,
        eval_dir=args.eval_data,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        num_classes=args.num_classes,
        seed=args.seed,
    )
    print(json.dumps(result))
    return 0


def _cmd_export(args) -> int:
    split = get_split(args.split)
    ids = features.export_features(args.images, split, args.ckpt, args.out_dir)
    if not ids:
        print(f"export: no labeled images in {args.images}", file=sys.stderr)
        return 1
    print(json.dumps({"exported": len(ids), "out_dir": args.out_dir}))
    return 0


def _cmd_evaluate(args) -> int:
    split = get_split(args.split)
    result, _ = features.evaluate(args.tensors, split, args.ckpt, args.manifest)
    print(json.dumps(result.as_dict()))
    return 0


def _cmd_classify(args) -> int:
    result, _ = features.classify_images(args.images, args.ckpt)
    print(json.dumps(result.as_dict()))
    return 0


_COMMANDS = {
    "prepare-data": _cmd_prepare_data,
    "train": _cmd_train,
    "export": _cmd_export,
    "evaluate": _cmd_evaluate,
    "classify": _cmd_classify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"modelbridge {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
