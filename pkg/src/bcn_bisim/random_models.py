"""Seeded random instances: models, equivalences and lumpable (lifted) systems."""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

import numpy as np

from .bisim import Partition
from .matrix import LogicalMatrix
from .model import BcnModel, PbcnModel, TargetSet


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_model(seed, N: int, M: int) -> BcnModel:
    """Every successor drawn uniformly from Delta_N."""
    rng = _rng(seed)
    return BcnModel(LogicalMatrix.from_index(N, rng.integers(0, N, N * M)), N, M)


def random_partition(seed, N: int, n_blocks: Optional[int] = None) -> Partition:
    rng = _rng(seed)
    k = int(rng.integers(1, N + 1)) if n_blocks is None else n_blocks
    labels = rng.permutation(np.arange(N) % k)
    return Partition(labels)


def random_target(seed, N: int) -> TargetSet:
    rng = _rng(seed)
    size = int(rng.integers(1, N + 1))
    return TargetSet.of(N, (rng.choice(N, size, replace=False) + 1).tolist())


def lifted_model(seed, N: int, M: int, n_blocks: int, strong: bool = True) -> tuple[BcnModel, Partition]:
    """A model for which a random partition is a bisimulation.

    A random quotient is drawn on the blocks; each state then moves to a random
    member of the quotient successor of its block.  With ``strong=False`` each
    state also permutes its inputs, which keeps the partition a weak but
    generally not a strong bisimulation.
    """
    rng = _rng(seed)
    part = random_partition(rng, N, n_blocks)
    members = part.blocks()
    quotient = rng.integers(0, n_blocks, (M, n_blocks))
    idx = np.empty(N * M, dtype=np.int64)
    for x in range(N):
        perm = np.arange(M) if strong else rng.permutation(M)
        for u in range(M):
            target_block = members[quotient[perm[u], part.labels[x]]]
            idx[u * N + x] = target_block[int(rng.integers(0, len(target_block)))] - 1
    return BcnModel(LogicalMatrix.from_index(N, idx), N, M), part


def random_probabilities(seed, s: int, max_weight: int = 4) -> tuple[Fraction, ...]:
    rng = _rng(seed)
    w = rng.integers(1, max_weight + 1, s)
    total = int(w.sum())
    return tuple(Fraction(int(x), total) for x in w)


def random_pbcn(seed, N: int, M: int, s: int) -> PbcnModel:
    rng = _rng(seed)
    modes = tuple(LogicalMatrix.from_index(N, rng.integers(0, N, N * M)) for _ in range(s))
    return PbcnModel(modes, random_probabilities(rng, s), N, M)


def lifted_pbcn(seed, N: int, M: int, s: int, n_blocks: int) -> tuple[PbcnModel, Partition]:
    """A PBCN lumpable with respect to a random partition: every mode is lifted from one quotient mode."""
    rng = _rng(seed)
    part = random_partition(rng, N, n_blocks)
    members = part.blocks()
    modes = []
    for _ in range(s):
        quotient = rng.integers(0, n_blocks, (M, n_blocks))
        idx = np.empty(N * M, dtype=np.int64)
        for x in range(N):
            for u in range(M):
                blk = members[quotient[u, part.labels[x]]]
                idx[u * N + x] = blk[int(rng.integers(0, len(blk)))] - 1
        modes.append(LogicalMatrix.from_index(N, idx))
    return PbcnModel(tuple(modes), random_probabilities(rng, s), N, M), part
