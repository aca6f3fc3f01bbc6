"""
Running per-layer mean and variance for traces too large to keep in memory

Updates follow the Welford recurrence; blocks are combined with the
Chan et al. pairwise merge, so folding the same blocks in the same order
always gives the same bits.
"""

from typing import Optional

import numpy as np

from numeric_core import ArgumentError


class RunningMoments:
    """Count, mean and sum of squared deviations for a fixed-width vector stream"""

    def __init__(self, width: int):
        if width < 1:
            raise ArgumentError(f"Width must be >= 1, got {width}")
        self.width = int(width)
        self.count = 0
        self.mean = np.zeros(self.width)
        self.m2 = np.zeros(self.width)

    def update_with(self, row) -> None:
        row = self._check(np.asarray(row, dtype=np.float64), 1)
        self.count += 1
        delta = row - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (row - self.mean)

    def update_batch(self, rows) -> None:
        rows = self._check(np.asarray(rows, dtype=np.float64), 2)
        if rows.shape[0] == 0:
            return
        block = RunningMoments(self.width)
        block.count = rows.shape[0]
        block.mean = np.mean(rows, axis=0)
        block.m2 = np.sum((rows - block.mean) ** 2, axis=0)
        self.merge(block)

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        if other.width != self.width:
            raise ArgumentError(f"Cannot merge width {other.width} into width {self.width}")
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return self
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / total)
        self.m2 = self.m2 + other.m2 + delta ** 2 * (self.count * other.count / total)
        self.count = total
        return self

    @property
    def variance(self) -> np.ndarray:
        """Unbiased (ddof=1) variance; NaN until two rows have been seen"""
        if self.count < 2:
            return np.full(self.width, np.nan)
        return self.m2 / (self.count - 1)

    def _check(self, array: np.ndarray, ndim: int) -> np.ndarray:
        if array.ndim != ndim or array.shape[-1] != self.width:
            raise ArgumentError(f"Expected width {self.width}, got shape {array.shape}")
        return array


def merge_all(blocks, width: Optional[int] = None) -> RunningMoments:
    """Fold blocks left to right into one accumulator"""
    blocks = list(blocks)
    if not blocks and width is None:
        raise ArgumentError("Nothing to merge")
    total = RunningMoments(width if width is not None else blocks[0].width)
    for block in blocks:
        total.merge(block)
    return total
