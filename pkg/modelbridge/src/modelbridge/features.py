"""Feature tensor export and Top-1 scoring through the split model.

Tensor files are plain NPY, rank-3 float32, laid out height x width x
channels, so they interchange losslessly with the packet-loss repair
package. The manifest is CSV with header `tensor_id,label`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .dataset import list_images, read_labels
from .model import load_checkpoint, load_image
from .splits import SplitSpec, split_model

MANIFEST_CSV = "manifest.csv"
_BATCH = 32


def write_manifest(path: str | Path, rows: list[tuple[str, int]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tensor_id", "label"])
        for tensor_id, label in rows:
            writer.writerow([tensor_id, label])


def read_manifest(path: str | Path) -> dict[str, int]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["tensor_id", "label"]:
            raise ValueError(f"{path}: unexpected header {header}")
        return {row[0]: int(row[1]) for row in reader}


def export_features(
    image_dir: str | Path,
    split: SplitSpec,
    ckpt_path: str | Path,
    out_dir: str | Path,
    batch_size: int = _BATCH,
) -> list[str]:
    """Run the front end over every labeled image and write one NPY each.

    Writes <image_id>.npy (float32, split.shape) plus manifest.csv to
    out_dir and returns the exported ids. A front-end output that does
    not match split.shape aborts with a diagnostic.
    """
    image_dir = Path(image_dir)
    labels = read_labels(image_dir)
    images = [p for p in list_images(image_dir) if p.stem in labels]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    model, _ = load_checkpoint(ckpt_path)
    front, _ = split_model(model, split)
    front.eval()

    exported: list[tuple[str, int]] = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            chunk = images[start : start + batch_size]
            batch = torch.stack([load_image(p) for p in chunk])
            feats = front(batch)  # (n, c, h, w)
            for path, feat in zip(chunk, feats):
                hwc = feat.permute(1, 2, 0).contiguous().numpy().astype(np.float32)
                if hwc.shape != split.shape:
                    raise ValueError(
                        f"{path.name}: front end produced {hwc.shape}, "
                        f"split {split.layer!r} expects {split.shape}"
                    )
                np.save(out_dir / f"{path.stem}.npy", hwc)
                exported.append((path.stem, labels[path.stem]))
    write_manifest(out_dir / MANIFEST_CSV, exported)
    return [tensor_id for tensor_id, _ in exported]


@dataclass
class EvalResult:
    top1: float
    evaluated: int
    errors: int

    def as_dict(self) -> dict:
        return {"top1": self.top1, "evaluated": self.evaluated, "errors": self.errors}


def _top1(predictions: dict[str, int], labels: dict[str, int]) -> float:
    if not predictions:
        return 0.0
    correct = sum(1 for tid, pred in predictions.items() if pred == labels[tid])
    return correct / len(predictions)


def evaluate(
    tensor_dir: str | Path,
    split: SplitSpec,
    ckpt_path: str | Path,
    manifest_path: str | Path,
    batch_size: int = _BATCH,
) -> tuple[EvalResult, dict[str, int]]:
    """Score Top-1 accuracy of feature tensors through the back end.

    Every manifest entry whose NPY file is missing or unreadable counts
    as an error and is excluded from the accuracy; a tensor with the
    wrong shape aborts. Returns (summary, tensor_id -> predicted label).
    """
    tensor_dir = Path(tensor_dir)
    labels = read_manifest(manifest_path)
    model, _ = load_checkpoint(ckpt_path)
    _, back = split_model(model, split)
    back.eval()

    loadable: list[tuple[str, np.ndarray]] = []
    errors = 0
    for tensor_id in sorted(labels):
        path = tensor_dir / f"{tensor_id}.npy"
        try:
            data = np.load(path)
        except (OSError, ValueError):
            errors += 1
            continue
        if data.shape != split.shape:
            raise ValueError(
                f"{path}: tensor shape {data.shape}, split {split.layer!r} "
                f"expects {split.shape}"
            )
        loadable.append((tensor_id, np.asarray(data, dtype=np.float32)))

    predictions: dict[str, int] = {}
    with torch.no_grad():
        for start in range(0, len(loadable), batch_size):
            chunk = loadable[start : start + batch_size]
            batch = torch.stack(
                [torch.from_numpy(arr).permute(2, 0, 1) for _, arr in chunk]
            )
            logits = back(batch)
            preds = logits.argmax(dim=1)
            for (tensor_id, _), pred in zip(chunk, preds):
                predictions[tensor_id] = int(pred)

    return EvalResult(_top1(predictions, labels), len(predictions), errors), predictions


def classify_images(
    image_dir: str | Path,
    ckpt_path: str | Path,
    batch_size: int = _BATCH,
) -> tuple[EvalResult, dict[str, int]]:
    """Unsplit reference: full-model Top-1 on a labeled image directory."""
    image_dir = Path(image_dir)
    labels = read_labels(image_dir)
    images = [p for p in list_images(image_dir) if p.stem in labels]
    model, _ = load_checkpoint(ckpt_path)

    predictions: dict[str, int] = {}
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            chunk = images[start : start + batch_size]
            batch = torch.stack([load_image(p) for p in chunk])
            preds = model(batch).argmax(dim=1)
            for path, pred in zip(chunk, preds):
                predictions[path.stem] = int(pred)

    return EvalResult(_top1(predictions, labels), len(predictions), 0), predictions
