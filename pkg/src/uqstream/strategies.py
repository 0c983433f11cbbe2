"""Fixed-capacity sample buffer and the acceptance/eviction policies.

A policy sees one incoming observation at a time together with its
uncertainty score and decides whether to learn it and, when the buffer is
full, which stored sample to drop:

    fifo              always accept, evict the oldest stored sample
    firo              always accept, evict a uniformly random sample
    riro              accept with probability p, evict a random sample
    greedy            accept only if the incoming score beats the lowest
                      stored score, evicting that lowest-scored sample
    threshold         skip scores at or below t, evict randomly
    threshold_greedy  skip scores at or below t, evict the lowest-scored
    offline           no per-point decisions (train once on everything)

Scores of stored samples are supplied by the caller and are expected to come
from the current model, so "lowest-scored" always means least informative
right now, not at insertion time.
"""

from dataclasses import dataclass

import numpy as np

STRATEGY_KINDS = ("offline", "fifo", "firo", "riro", "greedy", "threshold", "threshold_greedy")
_NEEDS_RNG = ("firo", "riro", "threshold")
_NEEDS_STORED_SCORES = ("greedy", "threshold_greedy")


@dataclass(frozen=True)
class Sample:
    """One observation: input vector, target vector, position in the stream."""

    x: np.ndarray
    y: np.ndarray
    arrival_index: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1:
            raise ValueError("sample x and y must be 1-D vectors")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValueError("sample contains non-finite values")
        if self.arrival_index < 0:
            raise ValueError("arrival_index must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


def as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    """Stack a sample collection into (inputs, targets) matrices."""
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample collection")
    return np.stack([s.x for s in samples]), np.stack([s.y for s in samples])


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    p: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind: {self.kind!r}")
        if self.kind == "riro":
            if self.p is None or not 0.0 < self.p <= 1.0:
                raise ValueError("riro requires acceptance probability p in (0, 1]")
        elif self.p is not None:
            raise ValueError(f"p is only meaningful for riro, not {self.kind!r}")
        if self.kind in ("threshold", "threshold_greedy"):
            if self.t is None or not np.isfinite(self.t):
                raise ValueError(f"{self.kind} requires a finite threshold t")
        elif self.t is not None:
            raise ValueError(f"t is only meaningful for threshold kinds, not {self.kind!r}")


@dataclass(frozen=True)
class Buffer:
    capacity: int
    items: tuple[Sample, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.capacity < 1:
            raise ValueError("buffer capacity must be positive")
        if len(self.items) > self.capacity:
            raise ValueError("buffer holds more items than its capacity")

    def __len__(self):
        return len(self.items)

    @property
    def is_full(self) -> bool:
        return len(self.items) >= self.capacity


@dataclass(frozen=True)
class Decision:
    action: str
    evict_index: int | None = None

    def __post_init__(self):
        if self.action not in ("accept", "skip"):
            raise ValueError(f"unknown action: {self.action!r}")
        if self.action == "skip" and self.evict_index is not None:
            raise ValueError("a skip decision cannot evict")


def _oldest_index(buf: Buffer) -> int:
    return int(np.argmin([s.arrival_index for s in buf.items]))


def decide(cfg: StrategyConfig, buf: Buffer, incoming_score: float,
           stored_scores=None, rng: np.random.Generator | None = None) -> Decision:
    """Apply one policy step to an incoming observation.

    stored_scores must align with buf.items and is required for the greedy
    kinds whenever the buffer is full. The riro coin is drawn before any
    eviction index, so the accept/skip pattern for a given stream does not
    depend on buffer occupancy.
    """
    if cfg.kind == "offline":
        raise ValueError("the offline strategy has no per-point decisions")
    if not np.isfinite(incoming_score):
        raise ValueError("incoming_score must be finite")
    if cfg.kind in _NEEDS_RNG and rng is None:
        raise ValueError(f"{cfg.kind} requires an rng")
    full = buf.is_full
    if cfg.kind in _NEEDS_STORED_SCORES and full:
        if stored_scores is None or len(stored_scores) != len(buf):
            raise ValueError(f"{cfg.kind} requires one stored score per buffered sample")

    if cfg.kind == "fifo":
        return Decision("accept", _oldest_index(buf) if full else None)
    if cfg.kind == "firo":
        return Decision("accept", int(rng.integers(len(buf))) if full else None)
    if cfg.kind == "riro":
        if rng.random() >= cfg.p:
            return Decision("skip")
        return Decision("accept", int(rng.integers(len(buf))) if full else None)
    if cfg.kind == "greedy":
        if not full:
            return Decision("accept")
        lowest = int(np.argmin(stored_scores))
        if incoming_score > stored_scores[lowest]:
            return Decision("accept", lowest)
        return Decision("skip")
    if cfg.kind == "threshold":
        if incoming_score <= cfg.t:
            return Decision("skip")
        return Decision("accept", int(rng.integers(len(buf))) if full else None)
    # threshold_greedy
    if incoming_score <= cfg.t:
        return Decision("skip")
    return Decision("accept", int(np.argmin(stored_scores)) if full else None)


def apply_decision(buf: Buffer, decision: Decision, sample: Sample) -> Buffer:
    """Produce the buffer that results from a decision on `sample`."""
    if decision.action == "skip":
        return buf
    items = list(buf.items)
    if decision.evict_index is not None:
        if not 0 <= decision.evict_index < len(items):
            raise ValueError(f"evict_index {decision.evict_index} out of range")
        del items[decision.evict_index]
    elif buf.is_full:
        raise ValueError("accepting into a full buffer requires an eviction")
    if any(s.arrival_index == sample.arrival_index for s in items):
        raise ValueError(f"arrival_index {sample.arrival_index} already buffered")
    items.append(sample)
    return Buffer(buf.capacity, tuple(items))
