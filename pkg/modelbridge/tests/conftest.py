"""Shared fixtures. Heavy artifacts (data tree, checkpoint, exports) are
built once into .cache/ next to the package and reused across runs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from modelbridge import export_features, get_split, prepare_digits, train_model

CACHE = Path(__file__).resolve().parent.parent / ".cache"
DIGITS = CACHE / "digits"
CKPT = CACHE / "resnet18_digits.pt"
EXPORT_LAYER1 = CACHE / "export_layer1"

TRAIN_PER_CLASS = 140
EVAL_PER_CLASS = 20  # 10 classes -> 200 eval images


@pytest.fixture(scope="session")
def digits_data() -> Path:
    if not (DIGITS / "eval" / "labels.csv").is_file():
        prepare_digits(
            DIGITS,
            train_per_class=TRAIN_PER_CLASS,
            eval_per_class=EVAL_PER_CLASS,
            seed=0,
        )
    return DIGITS


@pytest.fixture(scope="session")
def checkpoint(digits_data: Path) -> Path:
    """A checkpoint good enough to make accuracy comparisons meaningful."""
    marker = CKPT.with_suffix(".json")
    if not CKPT.is_file():
        result = train_model(
            digits_data / "train",
            CKPT,
            eval_dir=digits_data / "eval",
            epochs=2,
            seed=0,
        )
        marker.write_text(json.dumps(result))
    if marker.is_file():
        eval_top1 = json.loads(marker.read_text())["eval_top1"]
        assert eval_top1 is not None and eval_top1 >= 0.9, (
            f"checkpoint eval accuracy {eval_top1}; too weak to compare repair methods"
        )
    return CKPT


@pytest.fixture(scope="session")
def exported_eval(digits_data: Path, checkpoint: Path) -> Path:
    """Eval-set feature tensors at the first split, with manifest."""
    if not (EXPORT_LAYER1 / "manifest.csv").is_file():
        export_features(digits_data / "eval", get_split("layer1"), checkpoint, EXPORT_LAYER1)
    return EXPORT_LAYER1
