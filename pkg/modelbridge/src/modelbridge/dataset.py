"""Image directory layout and a small bundled classification dataset.

An image directory holds image files plus a `labels.csv` manifest with
header `image_id,label`, where image_id is the file stem. The bundled
dataset renders scikit-learn's 8x8 digit scans to grayscale PNGs, split
into balanced train/ and eval/ trees. It stands in for a full-size
validation set in environments where none can be downloaded; accuracy
comparisons in this package are trend-level, not absolute.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

LABELS_CSV = "labels.csv"


def write_labels(path: str | Path, rows: list[tuple[str, int]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id", "label"])
        for image_id, label in rows:
            writer.writerow([image_id, label])


def read_labels(image_dir: str | Path) -> dict[str, int]:
    """Read labels.csv from an image directory; image_id -> class index."""
    path = Path(image_dir) / LABELS_CSV
    if not path.is_file():
        raise FileNotFoundError(f"no {LABELS_CSV} in {image_dir}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["image_id", "label"]:
            raise ValueError(f"{path}: unexpected header {header}")
        return {row[0]: int(row[1]) for row in reader}


def list_images(image_dir: str | Path) -> list[Path]:
    """Image files in a directory, sorted by name."""
    exts = {".png", ".jpg", ".jpeg", ".bmp"}
    return sorted(p for p in Path(image_dir).iterdir() if p.suffix.lower() in exts)


def prepare_digits(
    out_dir: str | Path,
    train_per_class: int = 140,
    eval_per_class: int = 20,
    seed: int = 0,
) -> dict[str, int]:
    """Render the digits dataset into out_dir/train and out_dir/eval.

    Each class contributes train_per_class images to train/ and
    eval_per_class disjoint images to eval/, drawn in a seeded shuffle.
    Returns {"train": n, "eval": n} counts.
    """
    from sklearn.datasets import load_digits

    digits = load_digits()
    images = digits.images  # (n, 8, 8) floats in 0..16
    labels = digits.target
    rng = np.random.default_rng(seed)

    picks: dict[str, list[int]] = {"train": [], "eval": []}
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = rng.permutation(idx)
        need = train_per_class + eval_per_class
        if len(idx) < need:
            raise ValueError(
                f"class {cls}: {len(idx)} samples, need {need} for the requested split"
            )
        picks["train"].extend(idx[:train_per_class])
        picks["eval"].extend(idx[train_per_class:need])

    out_dir = Path(out_dir)
    counts = {}
    for split, indices in picks.items():
        split_dir = out_dir / split
        split_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for serial, i in enumerate(sorted(indices)):
            image_id = f"img_{serial:04d}"
            pixels = np.round(images[i] * (255.0 / 16.0)).astype(np.uint8)
            Image.fromarray(pixels, mode="L").save(split_dir / f"{image_id}.png")
            rows.append((image_id, int(labels[i])))
        write_labels(split_dir / LABELS_CSV, rows)
        counts[split] = len(rows)
    return counts
