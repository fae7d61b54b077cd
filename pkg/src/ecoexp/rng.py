"""Counter-based random sampling.

Every draw is a pure function of its key tuple, so simulations are
reproducible regardless of execution order, thread count, or scheduling.
Keys are hashed with blake2b into a 64-bit uniform; Poisson and Binomial
variates come from CDF inversion on that uniform, with a Box-Muller normal
approximation once the mean is large enough that inversion would crawl.
"""

from __future__ import annotations

import hashlib
import math
import struct

_NORMAL_CUTOVER = 50.0


def u64(seed: int, run_index: int, step: int, entity: str, stage: int, draw: int = 0) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(struct.pack("<QQQQQ", seed & (2**64 - 1), run_index, step, stage, draw))
    h.update(entity.encode("utf-8"))
    return int.from_bytes(h.digest(), "little")


def uniform01(seed: int, run_index: int, step: int, entity: str, stage: int, draw: int = 0) -> float:
    # (0, 1): both endpoints excluded so log/inversion never sees 0 or 1
    return (u64(seed, run_index, step, entity, stage, draw) + 1.0) / (2.0**64 + 2.0)


class StageDraws:
    """Uniform stream for one (seed, run_index, step, entity, stage) key."""

    def __init__(self, seed: int, run_index: int, step: int, entity: str, stage: int):
        self._key = (seed, run_index, step, entity, stage)
        self._draw = 0

    def next_uniform(self) -> float:
        u = uniform01(*self._key, self._draw)
        self._draw += 1
        return u

    def _standard_normal(self) -> float:
        u1 = self.next_uniform()
        u2 = self.next_uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def poisson(self, lam: float) -> int:
        if lam <= 0.0:
            return 0
        if lam > _NORMAL_CUTOVER:
            x = lam + math.sqrt(lam) * self._standard_normal()
            return max(0, int(round(x)))
        u = self.next_uniform()
        k = 0
        p = math.exp(-lam)
        cdf = p
        while u > cdf:
            k += 1
            p *= lam / k
            cdf += p
            if k > 10_000_000:  # cdf numerically saturated
                break
        return k

    def binomial(self, n: int, p: float) -> int:
        if n <= 0 or p <= 0.0:
            return 0
        if p >= 1.0:
            return n
        mean = n * p
        if mean > _NORMAL_CUTOVER and n * (1.0 - p) > _NORMAL_CUTOVER:
            x = mean + math.sqrt(mean * (1.0 - p)) * self._standard_normal()
            return min(n, max(0, int(round(x))))
        if p > 0.5:
            # invert the cheap tail
            return n - self.binomial(n, 1.0 - p)
        u = self.next_uniform()
        odds = p / (1.0 - p)
        k = 0
        pmf = (1.0 - p) ** n
        cdf = pmf
        while u > cdf and k < n:
            pmf *= odds * (n - k) / (k + 1)
            k += 1
            cdf += pmf
        return k


class ForcedDraws(StageDraws):
    """Expectation-forced test mode: every draw is its rounded mean."""

    def poisson(self, lam: float) -> int:
        return max(0, int(round(lam)))

    def binomial(self, n: int, p: float) -> int:
        if n <= 0:
            return 0
        return min(n, max(0, int(round(n * min(1.0, max(0.0, p))))))


def coin(seed: int, label: str) -> int:
    """Deterministic fair coin for a (seed, label) pair; returns 0 or 1."""
    return u64(seed, 0, 0, label, 0) & 1
