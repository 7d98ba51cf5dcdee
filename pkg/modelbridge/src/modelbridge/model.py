"""Backbone construction, checkpoint IO, and image preprocessing."""

from __future__ import annotations

from pathlib import Path

import torch
import torchvision
from PIL import Image
from torchvision import transforms

ARCH = "resnet18"
INPUT_SIZE = 224

# Standard preprocessing for the architecture; the same pipeline is used
# for training, export, and the unsplit reference so results compare
# like for like.
_NORM_MEAN = [0.485, 0.456, 0.406]
_NORM_STD = [0.229, 0.224, 0.225]

PREPROCESS = transforms.Compose(
    [
        transforms.Resize((INPUT_SIZE, INPUT_SIZE)),
        transforms.ToTensor(),
        transforms.Normalize(_NORM_MEAN, _NORM_STD),
    ]
)


def build_model(num_classes: int) -> torch.nn.Module:
    """Fresh backbone with a `num_classes`-way head, randomly initialized."""
    return torchvision.models.resnet18(weights=None, num_classes=num_classes)


def save_checkpoint(model: torch.nn.Module, num_classes: int, path: str | Path) -> None:
    payload = {
        "arch": ARCH,
        "num_classes": int(num_classes),
        "state_dict": model.state_dict(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(payload, path)


def load_checkpoint(path: str | Path) -> tuple[torch.nn.Module, int]:
    """Load a checkpoint saved by save_checkpoint; returns (model, num_classes)."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or "state_dict" not in payload:
        raise ValueError(f"{path}: not a checkpoint produced by this package")
    if payload.get("arch") != ARCH:
        raise ValueError(f"{path}: checkpoint arch {payload.get('arch')!r}, expected {ARCH!r}")
    num_classes = int(payload["num_classes"])
    model = build_model(num_classes)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, num_classes


def load_image(path: str | Path) -> torch.Tensor:
    """Read an image file into a preprocessed (3, H, W) float tensor."""
    with Image.open(path) as img:
        return PREPROCESS(img.convert("RGB"))
