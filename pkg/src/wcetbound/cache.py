"""Concrete instruction-cache semantics.

A cache state is an ordered tuple of distinct line identifiers, most
recently inserted (or promoted) first.  An access to a resident line is a
Hit; a non-resident line is a Miss and is inserted at the front, evicting
the last entry once the cache is full.  Two replacement flavours are
supported: PROMOTE_ON_HIT additionally moves a hit line to the front,
PURE_FIFO leaves the order untouched on hits.

Instructions are identified by their pc; the cache works on lines, with
line = pc // line_size.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import ValidationError


class Classification(enum.IntEnum):
    """Hit/miss outcome of a single access.  Orders HIT before MISS."""

    HIT = 0
    MISS = 1

    @property
    def letter(self) -> str:
        return "H" if self is Classification.HIT else "M"

    @classmethod
    def from_letter(cls, letter: str) -> "Classification":
        if letter == "H":
            return cls.HIT
        if letter == "M":
            return cls.MISS
        raise ValueError(f"classification letter must be H or M, got {letter!r}")


class ReplacementPolicy(enum.Enum):
    PROMOTE_ON_HIT = "promote"
    PURE_FIFO = "fifo"


# Most recently inserted/promoted line first; last entry is the eviction
# candidate.
CacheState = tuple[int, ...]


@dataclass(frozen=True)
class CacheConfig:
    """Cache geometry, per-access fetch costs, and replacement policy."""

    capacity: int = 2
    line_size: int = 1
    hit_time: int = 2
    miss_time: int = 20
    policy: ReplacementPolicy = ReplacementPolicy.PROMOTE_ON_HIT

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValidationError(f"capacity must be >= 1, got {self.capacity}")
        if self.line_size < 1:
            raise ValidationError(f"line_size must be >= 1, got {self.line_size}")
        if self.hit_time < 0 or self.miss_time < 0:
            raise ValidationError("hit_time and miss_time must be >= 0")
        if self.miss_time < self.hit_time:
            raise ValidationError(
                f"miss_time ({self.miss_time}) must be >= hit_time ({self.hit_time})"
            )
        if not isinstance(self.policy, ReplacementPolicy):
            raise ValidationError(f"unknown replacement policy {self.policy!r}")

    def line_of(self, pc: int) -> int:
        if pc < 1:
            raise ValidationError(f"pc must be >= 1, got {pc}")
        return pc // self.line_size


@dataclass(frozen=True)
class ClassifiedAccess:
    """One executed instruction together with its cache outcome."""

    pc: int
    line: int
    cls: Classification

    def __str__(self) -> str:
        return f"{self.pc}:{self.cls.letter}"


ClassifiedTrace = tuple[ClassifiedAccess, ...]


def init_cache() -> CacheState:
    """The empty cache: every slot unoccupied."""
    return ()


def find(state: CacheState, line: int) -> int | None:
    """Index of ``line`` in ``state`` (0 = most recent), None if absent.

    Index 0 is a genuine Hit like any other position.
    """
    for i, resident in enumerate(state):
        if resident == line:
            return i
    return None


def access(
    state: CacheState, line: int, config: CacheConfig
) -> tuple[CacheState, Classification]:
    """Perform one access and return the successor state and outcome."""
    idx = find(state, line)
    if idx is None:
        # Insert at front; the slice drops the eviction candidate when full.
        return (line,) + state[: config.capacity - 1], Classification.MISS
    if config.policy is ReplacementPolicy.PROMOTE_ON_HIT and idx > 0:
        return (line,) + state[:idx] + state[idx + 1 :], Classification.HIT
    return state, Classification.HIT


def validate_state(state: CacheState, config: CacheConfig) -> None:
    """Reject states that no reachable cache can be in."""
    if len(state) > config.capacity:
        raise ValidationError(
            f"cache state {state} exceeds capacity {config.capacity}"
        )
    if len(set(state)) != len(state):
        raise ValidationError(f"cache state {state} repeats a line")
    for line in state:
        if line < 0:
            raise ValidationError(f"line ids must be >= 0, got {line}")


def simulate(
    config: CacheConfig, init: CacheState, pcs: Iterable[int]
) -> ClassifiedTrace:
    """Classify a pc sequence starting from ``init``.

    Deterministic: the initial state and the pc sequence fix the trace.
    """
    validate_state(init, config)
    state = init
    out: list[ClassifiedAccess] = []
    for pc in pcs:
        line = config.line_of(pc)
        state, cls = access(state, line, config)
        out.append(ClassifiedAccess(pc, line, cls))
    return tuple(out)
