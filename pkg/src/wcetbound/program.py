"""Programs as finite automata over program-counter values.

A program is a set of locations with labelled edges; each edge executes one
instruction (identified by its pc).  A run is the pc sequence along a path
from the entry location to the end location.  Loop counters are part of the
location identity, so bounded loops appear unrolled and the automaton of a
bounded program is acyclic.

Also provides the parametric branching-loop generator used throughout the
test corpus, language enumeration, and the text file format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .cache import CacheConfig
from .errors import BoundExceeded, ParseError, ValidationError


class Edge(NamedTuple):
    src: str
    pc: int
    dst: str


@dataclass(frozen=True)
class Instruction:
    """A pc with its execute duration and the cache line it occupies."""

    pc: int
    dur: int
    line: int


@dataclass(frozen=True, eq=True)
class Program:
    name: str
    entry: str
    end: str
    edges: tuple[Edge, ...]
    durations: dict[int, int] = field(default_factory=dict)
    locations: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        self._validate()

    @classmethod
    def build(
        cls,
        name: str,
        entry: str,
        end: str,
        edges: Iterable[tuple[str, int, str] | Edge],
        durations: Mapping[int, int] | None = None,
    ) -> "Program":
        """Canonical constructor: sorts and dedupes edges, infers the
        location set, and defaults every unlisted pc duration to 1."""
        canon = tuple(sorted({Edge(*e) for e in edges}))
        locations = {entry, end}
        for e in canon:
            locations.add(e.src)
            locations.add(e.dst)
        durs = {e.pc: 1 for e in canon}
        if durations:
            for pc, dur in durations.items():
                if pc not in durs:
                    raise ValidationError(
                        f"duration given for pc={pc}, which no edge executes"
                    )
                durs[pc] = dur
        return cls(
            name=name,
            entry=entry,
            end=end,
            edges=canon,
            durations=dict(sorted(durs.items())),
            locations=frozenset(locations),
        )

    def _validate(self) -> None:
        if not self.name:
            raise ValidationError("program name must be nonempty")
        for loc in (self.entry, self.end):
            if loc not in self.locations:
                raise ValidationError(f"location {loc!r} not in location set")
        for e in self.edges:
            if e.src not in self.locations or e.dst not in self.locations:
                raise ValidationError(f"edge {e} uses an undeclared location")
            if e.pc < 1:
                raise ValidationError(f"pc must be >= 1, got {e.pc} on edge {e}")
            if e.src == self.end:
                raise ValidationError(
                    f"end location {self.end!r} must have no outgoing edges"
                )
        for pc, dur in self.durations.items():
            if dur < 0:
                raise ValidationError(f"duration for pc={pc} must be >= 0")
        for e in self.edges:
            if e.pc not in self.durations:
                raise ValidationError(f"edge {e} executes pc with no duration")
        reachable = self._reachable_from_entry()
        missing = self.locations - reachable
        if missing:
            raise ValidationError(
                f"locations unreachable from entry: {sorted(missing)}"
            )
        if self.end not in reachable:
            raise ValidationError("end is unreachable from entry: empty language")

    def _reachable_from_entry(self) -> set[str]:
        succ: dict[str, list[str]] = {}
        for e in self.edges:
            succ.setdefault(e.src, []).append(e.dst)
        seen = {self.entry}
        todo = [self.entry]
        while todo:
            for nxt in succ.get(todo.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    @property
    def pcs(self) -> tuple[int, ...]:
        return tuple(sorted(self.durations))

    def instruction_table(self, config: CacheConfig) -> dict[int, Instruction]:
        return {
            pc: Instruction(pc, dur, config.line_of(pc))
            for pc, dur in sorted(self.durations.items())
        }

    def lines(self, config: CacheConfig) -> tuple[int, ...]:
        return tuple(sorted({config.line_of(pc) for pc in self.durations}))


def co_reachable(program: Program) -> frozenset[str]:
    """Locations from which the end location is reachable (end included)."""
    pred: dict[str, list[str]] = {}
    for e in program.edges:
        pred.setdefault(e.dst, []).append(e.src)
    seen = {program.end}
    todo = [program.end]
    while todo:
        for prv in pred.get(todo.pop(), ()):
            if prv not in seen:
                seen.add(prv)
                todo.append(prv)
    return frozenset(seen)


def ensure_bounded(program: Program) -> frozenset[str]:
    """Check that the run set is finite; returns the co-reachable locations.

    A cycle among end-co-reachable locations yields arbitrarily long runs,
    so it raises BoundExceeded.  Cycles are never split across the
    co-reachable boundary: anything on a cycle with a co-reachable location
    is itself co-reachable.
    """
    co = co_reachable(program)
    succ: dict[str, list[str]] = {}
    for e in program.edges:
        if e.src in co and e.dst in co:
            succ.setdefault(e.src, []).append(e.dst)
    # Iterative three-colour DFS.
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {loc: WHITE for loc in co}
    for root in sorted(co):
        if colour[root] != WHITE:
            continue
        stack: list[tuple[str, Iterator[str]]] = [(root, iter(succ.get(root, ())))]
        colour[root] = GREY
        while stack:
            loc, it = stack[-1]
            advanced = False
            for nxt in it:
                if colour[nxt] == GREY:
                    raise BoundExceeded(
                        f"cycle through location {nxt!r} reaches the end: "
                        "run lengths are unbounded"
                    )
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    stack.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
            if not advanced:
                colour[loc] = BLACK
                stack.pop()
    return co


def language_sequences(program: Program, max_len: int) -> Iterator[tuple[int, ...]]:
    """Yield every entry-to-end pc sequence of length <= max_len, each
    exactly once, in lexicographic order (ascending pc at each step).

    Enumeration runs over the subset determinization of the location
    automaton, so duplicate labellings of distinct paths collapse.  Dead
    branches (locations that cannot reach the end) are pruned; if a run
    longer than max_len exists, BoundExceeded is raised rather than
    silently truncating the language.
    """
    if max_len < 0:
        raise ValidationError(f"max_len must be >= 0, got {max_len}")
    co = co_reachable(program)
    by_loc: dict[str, dict[int, set[str]]] = {}
    for e in program.edges:
        if e.src in co and e.dst in co:
            by_loc.setdefault(e.src, {}).setdefault(e.pc, set()).add(e.dst)

    succ_cache: dict[tuple[str, ...], tuple[tuple[int, tuple[str, ...]], ...]] = {}

    def successors(subset: tuple[str, ...]) -> tuple[tuple[int, tuple[str, ...]], ...]:
        cached = succ_cache.get(subset)
        if cached is not None:
            return cached
        merged: dict[int, set[str]] = {}
        for loc in subset:
            for pc, dsts in by_loc.get(loc, {}).items():
                merged.setdefault(pc, set()).update(dsts)
        out = tuple(
            (pc, tuple(sorted(merged[pc]))) for pc in sorted(merged)
        )
        succ_cache[subset] = out
        return out

    start = (program.entry,)
    path: list[int] = []
    stack: list[tuple[tuple[str, ...], int]] = [(start, 0)]
    while stack:
        subset, idx = stack[-1]
        succs = successors(subset)
        if idx == 0 and program.end in subset:
            yield tuple(path)
        if idx < len(succs):
            stack[-1] = (subset, idx + 1)
            pc, nxt = succs[idx]
            if len(path) == max_len:
                raise BoundExceeded(
                    f"a run longer than max_len={max_len} exists"
                )
            path.append(pc)
            stack.append((nxt, 0))
        else:
            stack.pop()
            if path:
                path.pop()


def branching_loop_program(
    iterations: int,
    branches: int,
    durations: Mapping[int, int] | None = None,
    name: str = "branching-loop",
) -> Program:
    """Bounded loop whose body picks one of ``branches``+1 instructions.

    Each of the ``iterations`` unrolled iterations executes the head pc 1
    twice, then one nondeterministically chosen branch pc from
    3..3+branches, then the shared tail pc 2.  Executing the head twice
    makes every iteration classify as Miss,Hit,Miss,Miss on a capacity-2
    cache with one line per pc, from the empty state onwards: the second
    head access always hits, and the tail of the previous iteration plus
    its branch are exactly what the two-slot cache holds when the next
    iteration begins.

    Runs: (branches+1)**iterations, all of length 4*iterations.
    """
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}")
    if branches < 0:
        raise ValidationError(f"branches must be >= 0, got {branches}")
    edges: list[tuple[str, int, str]] = []
    for k in range(iterations):
        a, b, c, d = (f"it{k}_{s}" for s in "abcd")
        nxt = f"it{k + 1}_a" if k + 1 < iterations else "end"
        edges.append((a, 1, b))
        edges.append((b, 1, c))
        for j in range(branches + 1):
            edges.append((c, 3 + j, d))
        edges.append((d, 2, nxt))
    return Program.build(name, "it0_a", "end", edges, durations)


def parse_program(text: str) -> Program:
    """Parse the program file format.

    Directives, one per line (``#`` starts a comment):
      program <name>
      entry <location>
      end <location>
      instr pc=<int> [dur=<int>]
      edge <from-location> <to-location> pc=<int>

    Durations default to 1 for any pc without an instr line.
    """
    name: str | None = None
    entry: str | None = None
    end: str | None = None
    durations: dict[int, int] = {}
    edges: list[tuple[str, int, str]] = []

    def kv(token: str, key: str, line_no: int) -> int:
        prefix = key + "="
        if not token.startswith(prefix):
            raise ParseError(f"expected {key}=<int>, got {token!r}", line_no)
        try:
            return int(token[len(prefix):])
        except ValueError:
            raise ParseError(f"expected integer after {prefix}", line_no) from None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]
        if directive == "program":
            if name is not None:
                raise ParseError("duplicate program directive", line_no)
            if len(args) != 1:
                raise ParseError("program takes exactly one name", line_no)
            name = args[0]
        elif directive == "entry":
            if entry is not None:
                raise ParseError("duplicate entry directive", line_no)
            if len(args) != 1:
                raise ParseError("entry takes exactly one location", line_no)
            entry = args[0]
        elif directive == "end":
            if end is not None:
                raise ParseError("duplicate end directive", line_no)
            if len(args) != 1:
                raise ParseError("end takes exactly one location", line_no)
            end = args[0]
        elif directive == "instr":
            if not args or len(args) > 2:
                raise ParseError("instr takes pc=<int> [dur=<int>]", line_no)
            pc = kv(args[0], "pc", line_no)
            dur = kv(args[1], "dur", line_no) if len(args) == 2 else 1
            if pc in durations:
                raise ValidationError(f"duplicate instr for pc={pc}")
            durations[pc] = dur
        elif directive == "edge":
            if len(args) != 3:
                raise ParseError(
                    "edge takes <from> <to> pc=<int>", line_no
                )
            pc = kv(args[2], "pc", line_no)
            edges.append((args[0], pc, args[1]))
        else:
            raise ParseError(f"unknown directive {directive!r}", line_no)

    if name is None:
        raise ValidationError("missing program directive")
    if entry is None:
        raise ValidationError("missing entry directive")
    if end is None:
        raise ValidationError("missing end directive")
    edge_pcs = {pc for _, pc, _ in edges}
    for pc in durations:
        if pc not in edge_pcs:
            raise ValidationError(f"instr pc={pc} appears on no edge")
    return Program.build(name, entry, end, edges, durations)


def serialize_program(program: Program) -> str:
    """Render a program in the file format; parse(serialize(p)) == p."""
    out = [
        f"program {program.name}",
        f"entry {program.entry}",
        f"end {program.end}",
    ]
    for pc, dur in sorted(program.durations.items()):
        out.append(f"instr pc={pc} dur={dur}")
    for e in program.edges:
        out.append(f"edge {e.src} {e.dst} pc={e.pc}")
    return "\n".join(out) + "\n"
