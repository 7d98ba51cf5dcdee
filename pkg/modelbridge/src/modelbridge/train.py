"""Local checkpoint production for environments without downloadable weights.

The bridge itself only loads checkpoints; this module exists to create
one when no pretrained file is available. Training runs on a labeled
image directory (see dataset.py) with fixed seeds, so a given data tree
yields the same checkpoint.
"""

from __future__ import annotations

from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

from .dataset import list_images, read_labels
from .model import build_model, load_image, save_checkpoint


class _ImageFolder(Dataset):
    """Labeled image directory; images decoded and preprocessed per access."""

    def __init__(self, image_dir: str | Path):
        image_dir = Path(image_dir)
        labels = read_labels(image_dir)
        self.items = [(p, labels[p.stem]) for p in list_images(image_dir) if p.stem in labels]
        if not self.items:
            raise ValueError(f"no labeled images in {image_dir}")

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int):
        path, label = self.items[i]
        return load_image(path), label


def _accuracy(model: torch.nn.Module, loader: DataLoader) -> float:
    model.eval()
    correct = total = 0
    with torch.no_grad():
        for batch, labels in loader:
            preds = model(batch).argmax(dim=1)
            correct += int((preds == labels).sum())
            total += len(labels)
    return correct / max(total, 1)


def train_model(
    train_dir: str | Path,
    out_path: str | Path,
    eval_dir: str | Path | None = None,
    epochs: int = 2,
    batch_size: int = 32,
    lr: float = 3e-4,
    num_classes: int = 10,
    seed: int = 0,
) -> dict:
    """Train a fresh backbone on train_dir and save a checkpoint.

    Returns {"epochs", "train_top1", "eval_top1"} (eval_top1 is None
    without an eval_dir).
    """
    torch.manual_seed(seed)
    train_set = _ImageFolder(train_dir)
    gen = torch.Generator().manual_seed(seed)
    train_loader = DataLoader(train_set, batch_size=batch_size, shuffle=True, generator=gen)

    model = build_model(num_classes)
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    loss_fn = torch.nn.CrossEntropyLoss()

    for _ in range(epochs):
        model.train()
        for batch, labels in train_loader:
            opt.zero_grad()
            loss = loss_fn(model(batch), labels)
            loss.backward()
            opt.step()

    plain_loader = DataLoader(train_set, batch_size=batch_size)
    result = {
        "epochs": epochs,
        "train_top1": _accuracy(model, plain_loader),
        "eval_top1": None,
    }
    if eval_dir is not None:
        eval_loader = DataLoader(_ImageFolder(eval_dir), batch_size=batch_size)
        result["eval_top1"] = _accuracy(model, eval_loader)

    save_checkpoint(model, num_classes, out_path)
    return result
