"""Split points of the classifier and the tensor shape contract at each cut."""

from __future__ import annotations

from dataclasses import dataclass

import torch.nn as nn


@dataclass(frozen=True)
class SplitSpec:
    """A named cut through the model.

    The front end runs on the sender up to and including `layer`; the back
    end consumes the feature tensor on the receiver. `shape` is the
    (height, width, channels) layout of the tensor files exchanged at the
    cut, matching the NPY contract of the repair package.
    """

    model: str
    layer: str
    shape: tuple[int, int, int]


# Cuts after the first and second residual stages for 224x224 inputs.
SPLITS: dict[str, SplitSpec] = {
    "layer1": SplitSpec(model="resnet18", layer="layer1", shape=(56, 56, 64)),
    "layer2": SplitSpec(model="resnet18", layer="layer2", shape=(28, 28, 128)),
}

# Sequential stages of the backbone, in forward order, up to pooling.
_STAGE_ORDER = ["conv1", "bn1", "relu", "maxpool", "layer1", "layer2", "layer3", "layer4"]


def get_split(name: str) -> SplitSpec:
    if name not in SPLITS:
        raise ValueError(f"unknown split {name!r}, expected one of {sorted(SPLITS)}")
    return SPLITS[name]


def split_model(model: nn.Module, spec: SplitSpec) -> tuple[nn.Module, nn.Module]:
    """Slice the model at the split layer into (front, back) submodules.

    front: preprocessed image batch -> feature batch (N, C, H, W).
    back:  feature batch -> logits (N, num_classes).
    Composing the two reproduces the full forward pass.
    """
    if spec.layer not in _STAGE_ORDER:
        raise ValueError(f"split layer {spec.layer!r} not in {_STAGE_ORDER}")
    idx = _STAGE_ORDER.index(spec.layer)
    front = nn.Sequential(*[getattr(model, name) for name in _STAGE_ORDER[: idx + 1]])
    back = nn.Sequential(
        *[getattr(model, name) for name in _STAGE_ORDER[idx + 1 :]],
        model.avgpool,
        nn.Flatten(1),
        model.fc,
    )
    return front, back
