"""
Seeded, splittable random streams

Every sampler in the toolkit draws from an ``Rng``. Streams are built on
``numpy.random.SeedSequence`` so that child streams addressed by a label or an
index are independent of each other and reproducible from the root seed alone.
Gaussian variates come from NumPy's ``PCG64`` bit generator through the
ziggurat transform used by ``Generator.standard_normal``.
"""

import hashlib
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import ArgumentError

Label = Union[str, int]

_SEED_MASK = (1 << 63) - 1


def _label_key(label: Label) -> int:
    """Map a split label onto a stable 32-bit spawn key"""
    if isinstance(label, (int, np.integer)):
        if label < 0:
            raise ArgumentError(f"Split index must be non-negative, got {label}")
        return int(label)
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "big")


class Rng:
    """Single-owner random stream addressed by (seed, spawn path)

    Parameters
    ----------
    seed : int
        Root 64-bit seed shared by the whole family of streams.
    path : sequence of int, optional
        Spawn key of this stream below the root.
    """

    def __init__(self, seed: int, path: Sequence[int] = ()):
        if seed < 0:
            raise ArgumentError(f"Seed must be non-negative, got {seed}")
        self.seed = int(seed)
        self.path: Tuple[int, ...] = tuple(int(p) for p in path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self.path})"

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def split(self, label: Label) -> "Rng":
        """Child stream for ``label``; identical labels give identical streams"""
        return Rng(self.seed, self.path + (_label_key(label),))

    def child(self, index: int) -> "Rng":
        return self.split(int(index))

    def derive_seed(self, label: Label) -> int:
        """Integer seed for work that must be re-creatable from a manifest"""
        sequence = np.random.SeedSequence(
            entropy=self.seed, spawn_key=self.path + (_label_key(label),)
        )
        return int(sequence.generate_state(1, dtype=np.uint64)[0]) & _SEED_MASK

    def standard_normal(self, size=None) -> np.ndarray:
        return self._generator.standard_normal(size)

    def normal(self, size=None, std: float = 1.0) -> np.ndarray:
        return std * self._generator.standard_normal(size)

    def chisquare(self, dof, size=None):
        return self._generator.chisquare(dof, size)

    def binomial(self, n, p: float, size=None):
        return self._generator.binomial(n, p, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def integers(self, low: int, high: Optional[int] = None, size=None):
        return self._generator.integers(low, high, size)


def as_rng(seed_or_rng: Union[int, Rng]) -> Rng:
    """Accept either a ready stream or a bare integer seed"""
    if isinstance(seed_or_rng, Rng):
        return seed_or_rng
    return Rng(int(seed_or_rng))
