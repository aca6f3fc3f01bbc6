"""
MNIST loader on top of the IDX codec
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import structlog

from deep_net import ObjectiveKind
from numeric_core import ArgumentError

from .dataset import Dataset, one_hot
from .idx import IdxParseError, load_idx_file

logger = structlog.get_logger(__name__)

MNIST_CLASSES = 10
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _locate(directory: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        candidate = directory / name
        if candidate.is_file():
            return candidate
    raise FileNotFoundError(f"No {stem}[.gz] in {directory}")


def mnist_available(directory: Union[str, Path, None]) -> bool:
    if not directory:
        return False
    try:
        for stem in MNIST_FILES["train"]:
            _locate(Path(directory), stem)
    except FileNotFoundError:
        return False
    return True


def load_mnist(
    directory: Union[str, Path], split: str = "train", limit: Optional[int] = None
) -> Dataset:
    """Images flattened to 784 reals in [0, 1], labels one-hot over 10 classes"""
    if split not in MNIST_FILES:
        raise ArgumentError(f"Split must be one of {sorted(MNIST_FILES)}, got {split!r}")
    directory = Path(directory)
    image_stem, label_stem = MNIST_FILES[split]
    images = load_idx_file(_locate(directory, image_stem))
    labels = load_idx_file(_locate(directory, label_stem))
    if images.ndim != 3 or images.dtype != np.uint8:
        raise IdxParseError(f"Expected a rank-3 unsigned-byte image tensor, got {images.shape}", 0)
    if labels.ndim != 1 or labels.shape[0] != images.shape[0]:
        raise IdxParseError(
            f"{labels.shape[0]} labels for {images.shape[0]} images", 0
        )
    if limit is not None:
        images, labels = images[:limit], labels[:limit]
    inputs = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    logger.info("mnist_loaded", split=split, examples=inputs.shape[0], directory=str(directory))
    return Dataset(
        inputs=inputs,
        targets=one_hot(labels, MNIST_CLASSES),
        objective=ObjectiveKind.CROSS_ENTROPY,
        labels=labels.astype(np.int64),
    )
