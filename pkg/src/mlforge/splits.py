"""Seeded k-fold partitions and reproducible RNG derivation.

A single 64-bit seed drives every random decision in the toolkit. Derived
generators are spawned with ``rng_from(seed, *salts)`` so that independent
pieces of work (folds, chain orders, internal cross-fits) are individually
reproducible without sharing generator state.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

SeedLike = int | tuple[int, ...] | list[int]


def rng_from(seed: SeedLike, *salts: int) -> np.random.Generator:
    """Deterministic generator for ``seed`` plus an optional salt path."""
    if isinstance(seed, (tuple, list)):
        entropy = list(seed) + list(salts)
    else:
        entropy = [int(seed)] + list(salts)
    return np.random.default_rng(entropy)


@dataclass(frozen=True)
class FoldAssignment:
    """Partition of ``n`` instances into ``n_folds`` near-equal folds."""

    fold_of: np.ndarray  # shape (n,), values in 0..n_folds-1
    n_folds: int

    def __post_init__(self):
        self.fold_of.setflags(write=False)
        counts = np.bincount(self.fold_of, minlength=self.n_folds)
        if counts.max() - counts.min() > 1:
            raise ValueError("fold sizes differ by more than 1")

    @property
    def n(self) -> int:
        return self.fold_of.shape[0]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def kfold_split(n: int, k: int, seed: SeedLike | np.random.Generator) -> FoldAssignment:
    """Shuffle ``0..n-1`` with the seeded generator, then chunk contiguously.

    The first ``n % k`` folds receive one extra instance.
    """
    if k < 2:
        raise UsageError(f"need at least 2 folds, got {k}")
    if k > n:
        raise UsageError(f"cannot split {n} instances into {k} folds")
    rng = seed if isinstance(seed, np.random.Generator) else rng_from(seed)
    perm = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    base, extra = divmod(n, k)
    start = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        fold_of[perm[start:start + size]] = fold
        start += size
    return FoldAssignment(fold_of=fold_of, n_folds=k)
