"""Seeded, splittable random streams.

Every stream is a PCG64 generator seeded from ``SeedSequence(seed,
spawn_key=key)``, where ``key`` is a tuple of small non-negative integers
naming the sub-stream (e.g. ``(GENERATORS, FS, level, block_start,
matching)``). Both SeedSequence hashing and PCG64 are fixed algorithms, so
a given (seed, key) yields the same doubles on every platform.

Only ``Generator.random`` (uniform doubles) is drawn from a stream;
permutations and integer choices are derived from those doubles here,
which keeps the results independent of numpy's higher-level sampling
routines.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# stream families
GENERATORS = 0
MONTE_CARLO = 1

MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    key: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))


def uniform(gen: np.random.Generator, size: int) -> np.ndarray:
    return gen.random(size)


def permutation(gen: np.random.Generator, size: int) -> np.ndarray:
    # ties among 53-bit doubles are broken by index (stable sort)
    return np.argsort(gen.random(size), kind="stable")


def sample_without_replacement(gen: np.random.Generator, population: int, k: int) -> np.ndarray:
    """k distinct integers from range(population), uniformly at random."""
    if k >= population:
        return np.arange(population)
    return permutation(gen, population)[:k]
