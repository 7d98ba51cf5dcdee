"""Split-model bridge: export feature tensors to NPY, score repairs by Top-1.

The bridge talks to the packet-loss repair package only through files
and its command line (NPY tensors, mask NPY, manifest/report files), so
either side can be swapped out independently.
"""

from .dataset import prepare_digits, read_labels
from .features import (
    EvalResult,
    classify_images,
    evaluate,
    export_features,
    read_manifest,
    write_manifest,
)
from .model import build_model, load_checkpoint, save_checkpoint
from .splits import SPLITS, SplitSpec, get_split, split_model
from .train import train_model

__all__ = [
    "EvalResult",
    "SPLITS",
    "SplitSpec",
    "build_model",
    "classify_images",
    "evaluate",
    "export_features",
    "get_split",
    "load_checkpoint",
    "prepare_digits",
    "read_labels",
    "read_manifest",
    "save_checkpoint",
    "split_model",
    "train_model",
    "write_manifest",
]
