"""Deterministic point samplers keyed by (seed, stream name)."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["Sampler", "stream_rng", "unit_grid"]


def _stream_key(stream: str) -> int:
    return int.from_bytes(hashlib.sha256(stream.encode()).digest()[:8], "little")


def stream_rng(seed: int, stream: str) -> np.random.Generator:
    """Generator depending only on ``seed`` and the stream label."""
    return np.random.default_rng([int(seed), _stream_key(stream)])


@dataclass(frozen=True)
class Sampler:
    """
    Uniform samples in the cube ``[low, high]^n``.

    Each call draws from a fresh generator seeded by ``(seed, stream)``, so the
    same request always returns the same points regardless of call order.
    """

    seed: int = 0
    low: float = 0.0
    high: float = 1.0
    count: int = 1000

    def points(self, n: int, stream: str = "points", count: int | None = None) -> np.ndarray:
        count = self.count if count is None else count
        rng = stream_rng(self.seed, f"{stream}/{n}/{self.low}/{self.high}")
        return rng.uniform(self.low, self.high, size=(count, n))

    def integers(self, n: int, radius: int, stream: str, count: int, nonzero: bool = True):
        """Integer vectors with ``|k|_inf <= radius``; zero excluded by default."""
        rng = stream_rng(self.seed, f"{stream}/{n}/int/{radius}")
        ks = []
        while len(ks) < count:
            k = rng.integers(-radius, radius + 1, size=n)
            if nonzero and not np.any(k):
                continue
            ks.append(k)
        return np.array(ks, dtype=np.int64)

    def with_window(self, low: float, high: float) -> "Sampler":
        return Sampler(self.seed, low, high, self.count)


def unit_grid(n: int, resolution: int) -> np.ndarray:
    """All ``resolution**n`` points ``i / resolution`` of ``[0, 1)^n``, shape (m, n)."""
    axis = np.arange(resolution) / resolution
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
