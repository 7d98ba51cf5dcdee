"""Command-line interface.

Subcommands:
  simulate   run a Monte Carlo sweep and write the result CSV
  corrupt    packetize tensors, pass them through the loss channel, save
             corrupted tensors plus their loss masks for replay
  repair     recover one or many corrupted tensors from saved masks
  trace      generate a channel trace and print its statistics
  gen        write a synthetic correlated-tensor corpus
  summarize  aggregate a sweep CSV per (pb, method)

`simulate` reads an optional JSON config; explicit flags override config
keys. Exit status is 0 on success and 1 on any runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import harness
from .channel import ge_convert, gen_trace, save_trace, trace_stats
from .harness import METHODS, ExperimentConfig, derive_seed, mask_digest
from .packets import PacketGrid, load_mask, packetize, reassemble, save_mask
from .tensors import gen_synthetic, load_tensor, quantize, save_tensor

_DTYPES = {"float32": np.float32, "float64": np.float64}


def _add_dtype(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dtype", choices=sorted(_DTYPES), default="float32",
                   help="element type of written tensor files (default float32)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="caltec",
                                     description="Feature-tensor packet loss simulation and recovery")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a seeded Monte Carlo sweep")
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--corpus", nargs="+", help="tensor files or directories")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--r", type=int, help="rows per packet")
    p.add_argument("--bits", type=int, help="quantizer bit depth")
    p.add_argument("--pb", type=float, nargs="+", help="burst loss probabilities")
    p.add_argument("--lb", type=float, nargs="+", help="average burst lengths")
    p.add_argument("--realizations", type=int, help="channel realizations per (pb, lb)")
    p.add_argument("--master-seed", type=int, help="master seed for trace derivation")
    p.add_argument("--methods", nargs="+", choices=sorted(METHODS), help="completion methods")
    p.add_argument("--order", choices=("channel-major", "row-major"), help="packet transmission order")

    p = sub.add_parser("corrupt", help="save corrupted tensors and their loss masks")
    p.add_argument("--corpus", nargs="+", required=True, help="tensor files or directories")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--pb", type=float, required=True)
    p.add_argument("--lb", type=float, required=True)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--realization", type=int, default=0)
    p.add_argument("--order", choices=("channel-major", "row-major"), default="channel-major")
    _add_dtype(p)

    p = sub.add_parser("repair", help="recover corrupted tensors from saved masks")
    p.add_argument("--tensor", help="one corrupted tensor file")
    p.add_argument("--mask", help="its loss mask (with --tensor)")
    p.add_argument("--out", help="output tensor path (with --tensor)")
    p.add_argument("--corpus", help="directory of <id>.npy + <id>.mask.npy pairs")
    p.add_argument("--out-dir", help="output directory (with --corpus)")
    p.add_argument("--r", type=int, default=8, help="rows per packet used at corruption time")
    p.add_argument("--method", choices=sorted(METHODS), default="caltec")
    p.add_argument("--report", help="write per-tensor repair reports to this JSON file")
    _add_dtype(p)

    p = sub.add_parser("trace", help="generate a channel trace and print statistics")
    p.add_argument("--pb", type=float, required=True)
    p.add_argument("--lb", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="trace length in packets")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also save the trace as uint8 NPY")

    p = sub.add_parser("gen", help="write a synthetic correlated-tensor corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--height", type=int, default=56)
    p.add_argument("--width", type=int, default=56)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--base-channels", type=int, default=8)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    _add_dtype(p)

    p = sub.add_parser("summarize", help="aggregate a sweep CSV per (pb, method)")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", help="write the aggregate table to this CSV")
    return parser


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    if args.corpus is not None:
        cfg.corpus = list(args.corpus)
    if args.out is not None:
        cfg.output = args.out
    if args.r is not None:
        cfg.rows_per_packet = args.r
    if args.bits is not None:
        cfg.bits = args.bits
    if args.pb is not None:
        cfg.pb_values = tuple(args.pb)
    if args.lb is not None:
        cfg.lb_values = tuple(args.lb)
    if args.realizations is not None:
        cfg.realizations = args.realizations
    if args.master_seed is not None:
        cfg.master_seed = args.master_seed
    if args.methods is not None:
        cfg.methods = tuple(args.methods)
    if args.order is not None:
        cfg.packet_order = args.order
    out = harness.run_sweep(cfg)
    print(out)
    return 0


def _cmd_corrupt(args) -> int:
    files = harness.expand_corpus(args.corpus)
    if not files:
        print("corrupt: no tensor files found", file=sys.stderr)
        return 1
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = ge_convert(args.pb, args.lb)
    dtype = _DTYPES[args.dtype]
    for path in files:
        tensor = load_tensor(path)
        q = quantize(tensor, bits=args.bits)
        stream = packetize(q, args.r, order=args.order)
        seed = derive_seed(args.master_seed, path.stem, args.pb, args.lb, args.realization)
        trace = gen_trace(params, stream.n_total, seed)
        corrupted, mask = reassemble(stream, trace)
        save_tensor(corrupted, out_dir / f"{path.stem}.npy", dtype=dtype)
        save_mask(mask, out_dir / f"{path.stem}.mask.npy")
    print(out_dir)
    return 0


def _repair_one(tensor_path, mask_path, out_path, args, reports: dict) -> None:
    tensor = load_tensor(tensor_path)
    grid = PacketGrid(h=tensor.h, w=tensor.w, r=args.r)
    mask = load_mask(mask_path, grid)
    if mask.c != tensor.c:
        raise ValueError(
            f"{mask_path}: mask has {mask.c} channels, tensor has {tensor.c}"
        )
    repaired, report = METHODS[args.method](tensor, mask)
    save_tensor(repaired, out_path, dtype=_DTYPES[args.dtype])
    reports[Path(tensor_path).stem] = report.as_dict() | {"mask_digest": mask_digest(mask)}


def _cmd_repair(args) -> int:
    reports: dict = {}
    if args.tensor:
        if not (args.mask and args.out):
            print("repair: --tensor requires --mask and --out", file=sys.stderr)
            return 1
        _repair_one(args.tensor, args.mask, args.out, args, reports)
        print(args.out)
    elif args.corpus:
        if not args.out_dir:
            print("repair: --corpus requires --out-dir", file=sys.stderr)
            return 1
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        pairs = sorted(Path(args.corpus).glob("*.mask.npy"))
        if not pairs:
            print(f"repair: no *.mask.npy files in {args.corpus}", file=sys.stderr)
            return 1
        for mask_path in pairs:
            stem = mask_path.name[: -len(".mask.npy")]
            tensor_path = mask_path.with_name(f"{stem}.npy")
            _repair_one(tensor_path, mask_path, out_dir / f"{stem}.npy", args, reports)
        print(out_dir)
    else:
        print("repair: pass --tensor or --corpus", file=sys.stderr)
        return 1
    if args.report:
        with open(args.report, "w") as f:
            json.dump(reports, f, indent=2)
    return 0


def _cmd_trace(args) -> int:
    params = ge_convert(args.pb, args.lb)
    trace = gen_trace(params, args.n, args.seed)
    stats = trace_stats(trace)
    if args.out:
        save_trace(trace, args.out)
    print(json.dumps({
        "pb": args.pb,
        "lb": args.lb,
        "n": args.n,
        "seed": args.seed,
        "loss_fraction": stats.loss_fraction,
        "mean_burst_length": stats.mean_burst_length,
        "burst_count": stats.burst_count,
    }))
    return 0


def _cmd_gen(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dtype = _DTYPES[args.dtype]
    meta = {}
    for idx in range(args.count):
        tensor, recipes = gen_synthetic(
            args.height, args.width, args.channels,
            base_channels=args.base_channels,
            noise_sigma=args.noise_sigma,
            seed=args.seed + idx,
        )
        name = f"tensor_{idx:03d}"
        save_tensor(tensor, out_dir / f"{name}.npy", dtype=dtype)
        meta[name] = {"seed": args.seed + idx, "recipes": [asdict(r) for r in recipes]}
    with open(out_dir / "recipes.json", "w") as f:
        json.dump(meta, f, indent=2)
    print(out_dir)
    return 0


def _cmd_summarize(args) -> int:
    table = harness.summarize(args.csv, out_path=args.out)
    print(",".join(harness.SUMMARY_HEADER))
    for row in table:
        print(",".join(str(row[k]) for k in harness.SUMMARY_HEADER))
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "corrupt": _cmd_corrupt,
    "repair": _cmd_repair,
    "trace": _cmd_trace,
    "gen": _cmd_gen,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:
        print(f"caltec {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
