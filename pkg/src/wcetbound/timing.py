"""Timing of classified traces.

Each instruction occupies the pipeline alone: a fetch phase whose cost is
the hit or miss time, then an execute phase lasting the instruction's
duration.  All delays are integer constants, so the accumulated clock over
a trace is an exact sum; it depends on the classifications only, never on
the cache contents that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .cache import CacheConfig, Classification, ClassifiedTrace
from .errors import UnknownInstruction, ValidationError


@dataclass(frozen=True)
class StepCost:
    fetch_cycles: int
    execute_cycles: int

    @property
    def total(self) -> int:
        return self.fetch_cycles + self.execute_cycles


def step_cost(
    pc: int,
    cls: Classification,
    durations: Mapping[int, int],
    config: CacheConfig,
) -> StepCost:
    """Cycles one instruction contributes: fetch (hit/miss) + execute."""
    try:
        dur = durations[pc]
    except KeyError:
        raise UnknownInstruction(pc) from None
    if dur < 0:
        raise ValidationError(f"duration for pc={pc} must be >= 0, got {dur}")
    fetch = config.hit_time if cls is Classification.HIT else config.miss_time
    return StepCost(fetch, dur)


def trace_time(
    trace: ClassifiedTrace, durations: Mapping[int, int], config: CacheConfig
) -> int:
    """Total cycle count of a trace; 0 for the empty trace."""
    return sum(
        step_cost(a.pc, a.cls, durations, config).total for a in trace
    )
