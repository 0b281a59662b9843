"""Seeded Monte Carlo estimates of P(X < T_m) and the exponential facts behind it.

X is the maximum of n Exp(1) variables and T_m ~ Gamma(m, theta) is built as
a sum of m Exp(theta) variables. Exponentials come from -log(U)/rate with U
uniform on (0, 1].

Reproducibility: the generator is numpy's PCG64. Chunk ``i`` of a run with
seed ``s`` draws from ``PCG64(SeedSequence(s, spawn_key=(i,)))``, so a
``StreamConfig`` fixes every uniform regardless of thread count or chunk
execution order. Within a chunk, each sample consumes its uniforms
contiguously in the same order as the scalar samplers below.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from altbinom.exact import IdentityInstance, InvalidInstanceError

Z95 = 1.96
MIN_SURVIVORS = 100
GENERATOR = "PCG64"

T = TypeVar("T")


class DegenerateConditioningError(RuntimeError):
    """Too few samples satisfied the conditioning event."""


@dataclass(frozen=True)
class StreamConfig:
    seed: int
    chunk_count: int = 16
    samples_per_chunk: int = 62_500

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.chunk_count < 1 or self.samples_per_chunk < 1:
            raise ValueError("chunk_count and samples_per_chunk must be positive")

    @property
    def samples(self) -> int:
        return self.chunk_count * self.samples_per_chunk

    @classmethod
    def for_samples(cls, samples: int, seed: int, chunk_count: int = 16) -> "StreamConfig":
        if samples < 1 or chunk_count < 1:
            raise ValueError("samples and chunk_count must be positive")
        if samples % chunk_count:
            raise ValueError(
                f"samples ({samples}) must be a multiple of the chunk count ({chunk_count})"
            )
        return cls(seed, chunk_count, samples // chunk_count)


def derive_seed(seed: int, index: int) -> int:
    """64-bit child seed for row/instance ``index`` under base ``seed``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


class Stream:
    """Uniform source on (0, 1] that counts how many values it has handed out."""

    def __init__(self, seed: int, chunk_index: int = 0) -> None:
        ss = np.random.SeedSequence(seed, spawn_key=(chunk_index,))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self.position = 0

    def uniform(self) -> float:
        self.position += 1
        return 1.0 - self._gen.random()

    def uniforms(self, size: int) -> np.ndarray:
        self.position += size
        return 1.0 - self._gen.random(size)


def _check_rate(rate: float) -> float:
    rate = float(rate)
    if not rate > 0 or not math.isfinite(rate):
        raise ValueError(f"rate must be positive and finite, got {rate}")
    return rate


def sample_exp(rate: float, stream: Stream) -> float:
    return float(-np.log(stream.uniform()) / _check_rate(rate))


def sample_max_exp1(n: int, stream: Stream) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(sample_exp(1.0, stream) for _ in range(n))


def sample_sum_exp(n: int, stream: Stream) -> float:
    """One draw of Y_1 + ... + Y_n with Y_k ~ Exp(k)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0.0
    for k in range(1, n + 1):
        total += sample_exp(k, stream)
    return total


def sample_gamma(m: int, theta: float, stream: Stream) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    total = 0.0
    for _ in range(m):
        total += sample_exp(theta, stream)
    return total


# Vectorised counterparts. Row i of ``u`` holds the uniforms of sample i in
# consumption order, and the arithmetic mirrors the scalar samplers.


def _exp_cols(u: np.ndarray, rates) -> np.ndarray:
    return -np.log(u) / rates


def _max_exp1_rows(u: np.ndarray) -> np.ndarray:
    return _exp_cols(u, 1.0).max(axis=1)


def _sequential_rowsum(e: np.ndarray) -> np.ndarray:
    total = np.zeros(e.shape[0])
    for j in range(e.shape[1]):
        total = total + e[:, j]
    return total


def _sum_exp_rows(u: np.ndarray) -> np.ndarray:
    rates = np.arange(1, u.shape[1] + 1, dtype=float)
    return _sequential_rowsum(_exp_cols(u, rates))


def _gamma_rows(u: np.ndarray, theta: float) -> np.ndarray:
    return _sequential_rowsum(_exp_cols(u, theta))


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    stderr: float
    ci95_low: float
    ci95_high: float
    samples: int
    seed: int
    chunk_count: int

    @classmethod
    def from_counts(cls, hits: int, samples: int, cfg: StreamConfig) -> "McEstimate":
        p = hits / samples
        se = math.sqrt(p * (1.0 - p) / samples)
        return cls(p, se, p - Z95 * se, p + Z95 * se, samples, cfg.seed, cfg.chunk_count)

    @classmethod
    def from_moments(
        cls, total: float, total_sq: float, samples: int, cfg: StreamConfig
    ) -> "McEstimate":
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        se = math.sqrt(var / samples)
        return cls(mean, se, mean - Z95 * se, mean + Z95 * se, samples, cfg.seed, cfg.chunk_count)

    def within(self, target: float, sigmas: float = 4.0) -> bool:
        return abs(self.p_hat - float(target)) <= sigmas * self.stderr

    def to_dict(self) -> dict:
        return asdict(self)


def _default_threads() -> int:
    return os.cpu_count() or 1


def run_chunks(
    cfg: StreamConfig,
    width: int,
    kernel: Callable[[np.ndarray], T],
    threads: Optional[int] = None,
) -> List[T]:
    """Apply ``kernel`` to each chunk's (samples_per_chunk, width) uniform block.

    Results come back in chunk order whatever the thread count.
    """

    def one(i: int) -> T:
        stream = Stream(cfg.seed, i)
        u = stream.uniforms(cfg.samples_per_chunk * width).reshape(cfg.samples_per_chunk, width)
        return kernel(u)

    threads = threads or _default_threads()
    if threads == 1 or cfg.chunk_count == 1:
        return [one(i) for i in range(cfg.chunk_count)]
    with ThreadPoolExecutor(max_workers=min(threads, cfg.chunk_count)) as pool:
        return list(pool.map(one, range(cfg.chunk_count)))


def _count_estimate(cfg, width, kernel, threads) -> McEstimate:
    hits = sum(run_chunks(cfg, width, lambda u: int(np.count_nonzero(kernel(u))), threads))
    return McEstimate.from_counts(hits, cfg.samples, cfg)


def _mean_estimate(cfg, width, kernel, threads) -> McEstimate:
    parts = run_chunks(
        cfg, width, lambda u: (lambda v: (math.fsum(v), math.fsum(v * v)))(kernel(u)), threads
    )
    # fsum over chunk partials in index order keeps the merge order-independent
    total = math.fsum(p[0] for p in parts)
    total_sq = math.fsum(p[1] for p in parts)
    return McEstimate.from_moments(total, total_sq, cfg.samples, cfg)


def estimate_p_less(
    inst: IdentityInstance, cfg: StreamConfig, threads: Optional[int] = None
) -> McEstimate:
    """Estimate P(max of n Exp(1) < Gamma(m, theta)); ties count as not less."""
    if inst.n < 1:
        raise InvalidInstanceError("Monte Carlo needs n >= 1")
    if inst.theta <= 0:
        raise InvalidInstanceError("Monte Carlo needs theta > 0 (Exp(theta) rate)")
    n, m, theta = inst.n, inst.m, float(inst.theta)

    def hit(u: np.ndarray) -> np.ndarray:
        return _max_exp1_rows(u[:, :n]) < _gamma_rows(u[:, n:], theta)

    return _count_estimate(cfg, n + m, hit, threads)


class Representation(enum.Enum):
    MAX_FORM = "max"
    SUM_FORM = "sum"


def estimate_laplace(
    n: int,
    theta: float,
    cfg: StreamConfig,
    representation: Representation,
    threads: Optional[int] = None,
) -> McEstimate:
    """Sample mean of exp(-theta * X) with X drawn as a max or as a sum of exponentials."""
    if n < 1:
        raise ValueError("n must be >= 1")
    theta = _check_rate(theta)
    rows = _max_exp1_rows if representation is Representation.MAX_FORM else _sum_exp_rows
    return _mean_estimate(cfg, n, lambda u: np.exp(-theta * rows(u)), threads)


def two_exp_race(
    lam: float, mu: float, cfg: StreamConfig, threads: Optional[int] = None
) -> McEstimate:
    """P(Exp(lam) < Exp(mu)); exact value lam / (lam + mu)."""
    lam, mu = _check_rate(lam), _check_rate(mu)
    return _count_estimate(
        cfg, 2, lambda u: _exp_cols(u[:, 0], lam) < _exp_cols(u[:, 1], mu), threads
    )


def min_exp_check(k: int, cfg: StreamConfig, threads: Optional[int] = None) -> McEstimate:
    """P(min of k Exp(1) > ln 2 / k), which is exactly 1/2 when the min is Exp(k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    t0 = math.log(2.0) / k
    return _count_estimate(cfg, k, lambda u: _exp_cols(u, 1.0).min(axis=1) > t0, threads)


def memoryless_check(
    t: float, s: float, cfg: StreamConfig, threads: Optional[int] = None
) -> Tuple[McEstimate, McEstimate]:
    """(P(Z > t+s | Z > s), P(Z > t)) for Z ~ Exp(1), from the same draws.

    The conditional estimate is by rejection, so its ``samples`` is the
    number of draws that survived Z > s.
    """
    t, s = _check_rate(t), _check_rate(s)

    def counts(u: np.ndarray) -> Tuple[int, int, int]:
        z = _exp_cols(u[:, 0], 1.0)
        survived = z > s
        return (
            int(np.count_nonzero(survived)),
            int(np.count_nonzero(z[survived] > t + s)),
            int(np.count_nonzero(z > t)),
        )

    parts = run_chunks(cfg, 1, counts, threads)
    survivors = sum(p[0] for p in parts)
    if survivors < MIN_SURVIVORS:
        raise DegenerateConditioningError(
            f"only {survivors} of {cfg.samples} samples exceeded s={s}; "
            f"need at least {MIN_SURVIVORS}"
        )
    conditional = McEstimate.from_counts(sum(p[1] for p in parts), survivors, cfg)
    plain = McEstimate.from_counts(sum(p[2] for p in parts), cfg.samples, cfg)
    return conditional, plain


def exact_laplace(n: int, theta: Fraction) -> Fraction:
    """prod_{k=1}^{n} k/(k+theta), the closed form for E[exp(-theta X)]."""
    out = Fraction(1)
    for k in range(1, n + 1):
        out *= Fraction(k) / (k + Fraction(theta))
    return out
