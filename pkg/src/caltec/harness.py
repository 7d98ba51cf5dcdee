"""Monte Carlo experiment runner: seeded sweeps over a (pb, lb) grid.

Every (tensor, pb, lb, realization) work unit derives its trace seed from a
byte-defined SHA-256 hash, so sweeps replay bit-exactly on any platform and
every method inside a work unit sees the identical loss mask. Results are
written as CSV with a fixed column order; a failed work unit becomes an
``error:*`` row and the run continues.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .baselines import linear_interp, neighbor_copy, zero_fill
from .channel import ge_convert, gen_trace
from .packets import LossMask, PacketStream, packetize, reassemble
from .repair import RepairReport, repair_tensor
from .tensors import FeatureTensor, TensorIOError, dequantize, load_tensor, quantize

__all__ = [
    "CSV_HEADER",
    "METHODS",
    "ExperimentConfig",
    "derive_seed",
    "mask_digest",
    "mse",
    "psnr",
    "run_sweep",
    "summarize",
]

CSV_HEADER = [
    "tensor_id",
    "pb",
    "lb",
    "realization",
    "method",
    "packets_lost",
    "mask_digest",
    "mse",
    "psnr",
    "repair_ms",
    "fallback_zero_channels",
    "fallback_neighbor_copy",
    "fallback_singular",
]

METHODS: dict[str, Callable[[FeatureTensor, LossMask], tuple[FeatureTensor, RepairReport]]] = {
    "caltec": repair_tensor,
    "neighbor_copy": neighbor_copy,
    "linear_interp": linear_interp,
    "zero_fill": zero_fill,
}

DEFAULT_PB = (0.01, 0.10, 0.20, 0.30)
DEFAULT_LB = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0)


@dataclass
class ExperimentConfig:
    """Sweep definition; defaults mirror the standard benchmark grid."""

    corpus: list[str] = field(default_factory=list)
    output: str = "results.csv"
    rows_per_packet: int = 8
    bits: int = 8
    pb_values: tuple[float, ...] = DEFAULT_PB
    lb_values: tuple[float, ...] = DEFAULT_LB
    realizations: int = 10
    master_seed: int = 0
    methods: tuple[str, ...] = ("caltec", "neighbor_copy", "linear_interp", "zero_fill")
    packet_order: str = "channel-major"

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            raw = json.load(f)
        known = {f_.name for f_ in cls.__dataclass_fields__.values()}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.pb_values = tuple(float(x) for x in cfg.pb_values)
        cfg.lb_values = tuple(float(x) for x in cfg.lb_values)
        cfg.methods = tuple(cfg.methods)
        cfg.corpus = list(cfg.corpus)
        return cfg

    def validate(self) -> None:
        if not self.corpus:
            raise ValueError("config needs a nonempty corpus")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}, expected one of {sorted(METHODS)}")


def derive_seed(master_seed: int, tensor_id: str, pb: float, lb: float, realization: int) -> int:
    """Stable 128-bit trace seed for one (tensor, pb, lb, realization) unit.

    Defined as the first 16 bytes (big-endian) of
    SHA-256("{master_seed}|{tensor_id}|{repr(pb)}|{repr(lb)}|{realization}")
    encoded as UTF-8, with pb and lb passed through float().
    """
    key = f"{master_seed}|{tensor_id}|{float(pb)!r}|{float(lb)!r}|{realization}"
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "big")


def mask_digest(mask: LossMask) -> str:
    """Short SHA-256 digest of a mask's shape and per-packet flags."""
    c, n = mask.received.shape
    h = hashlib.sha256(f"{c}x{n}:".encode("ascii"))
    h.update(np.ascontiguousarray(mask.received, dtype=np.uint8).tobytes())
    return h.hexdigest()[:16]


def mse(a: FeatureTensor, b: FeatureTensor) -> float:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def psnr(err: float, peak: float) -> float:
    """Peak signal-to-noise ratio in dB; peak is the reference dynamic range."""
    if err == 0.0:
        return math.inf
    if peak == 0.0:
        return -math.inf
    return 10.0 * math.log10(peak * peak / err)


def expand_corpus(entries: Iterable[str]) -> list[Path]:
    """Resolve corpus entries (NPY files or directories of them), sorted by name."""
    files: list[Path] = []
    for entry in entries:
        p = Path(entry)
        if p.is_dir():
            files.extend(sorted(q for q in p.iterdir() if q.suffix == ".npy"))
        else:
            files.append(p)
    return files


def _error_row(tensor_id: str, pb, lb, realization, kind: str) -> dict:
    row = {k: "nan" for k in CSV_HEADER}
    row.update(
        tensor_id=tensor_id,
        pb=repr(float(pb)) if pb is not None else "nan",
        lb=repr(float(lb)) if lb is not None else "nan",
        realization=realization if realization is not None else -1,
        method=f"error:{kind}",
        packets_lost=0,
        mask_digest="",
    )
    return row


def iter_rows(config: ExperimentConfig) -> Iterator[dict]:
    """Yield result rows in canonical order (tensor, pb, lb, realization, method)."""
    config.validate()
    for path in expand_corpus(config.corpus):
        tensor_id = path.stem
        try:
            tensor = load_tensor(path)
        except TensorIOError:
            yield _error_row(tensor_id, None, None, None, "unreadable_tensor")
            continue
        q = quantize(tensor, bits=config.bits)
        reference = dequantize(q)
        peak = q.vmax - q.vmin
        stream = packetize(q, config.rows_per_packet, order=config.packet_order)
        for pb in config.pb_values:
            for lb in config.lb_values:
                try:
                    params = ge_convert(pb, lb)
                except ValueError:
                    yield _error_row(tensor_id, pb, lb, None, "bad_ge_params")
                    continue
                for m in range(config.realizations):
                    seed = derive_seed(config.master_seed, tensor_id, pb, lb, m)
                    trace = gen_trace(params, stream.n_total, seed)
                    corrupted, mask = reassemble(stream, trace)
                    digest = mask_digest(mask)
                    lost = mask.n_lost
                    for method in config.methods:
                        repaired, report = METHODS[method](corrupted, mask)
                        err = mse(repaired, reference)
                        yield {
                            "tensor_id": tensor_id,
                            "pb": repr(float(pb)),
                            "lb": repr(float(lb)),
                            "realization": m,
                            "method": method,
                            "packets_lost": lost,
                            "mask_digest": digest,
                            "mse": repr(err),
                            "psnr": repr(psnr(err, peak)),
                            "repair_ms": f"{report.repair_ms:.3f}",
                            "fallback_zero_channels": report.zero_filled_channels,
                            "fallback_neighbor_copy": report.neighbor_copy_fallbacks,
                            "fallback_singular": report.singular_fits,
                        }


def run_sweep(config: ExperimentConfig) -> Path:
    """Run the full sweep and write the result CSV; returns its path."""
    out = Path(config.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in iter_rows(config):
            writer.writerow(row)
    return out


SUMMARY_HEADER = ["pb", "method", "rows", "mean_mse", "mean_psnr", "mean_repair_ms"]


def summarize(csv_path, out_path=None) -> list[dict]:
    """Aggregate a sweep CSV per (pb, method), pooling all lb and realizations.

    Skips error rows. Optionally writes the aggregate table as CSV.
    """
    groups: dict[tuple[float, str], list[tuple[float, float, float]]] = {}
    with open(csv_path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(
                f"unexpected CSV schema {reader.fieldnames}, expected {CSV_HEADER}"
            )
        for row in reader:
            if row["method"].startswith("error:"):
                continue
            key = (float(row["pb"]), row["method"])
            groups.setdefault(key, []).append(
                (float(row["mse"]), float(row["psnr"]), float(row["repair_ms"]))
            )
    table = []
    for (pb, method), vals in sorted(groups.items()):
        arr = np.array(vals, dtype=np.float64)
        table.append(
            {
                "pb": pb,
                "method": method,
                "rows": len(vals),
                "mean_mse": float(arr[:, 0].mean()),
                "mean_psnr": float(arr[:, 1].mean()),
                "mean_repair_ms": float(arr[:, 2].mean()),
            }
        )
    if out_path is not None:
        with open(out_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=SUMMARY_HEADER, lineterminator="\n")
            writer.writeheader()
            for row in table:
                writer.writerow(row)
    return table
