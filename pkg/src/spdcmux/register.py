"""Delay register topology and reachability.

The switching network is a stack of source rows feeding a binary delay
register: K crossing stages with fixed delays of 1, 2, ..., 2**(K-1)
clock cycles, each of which a photon can take or bypass.  A photon that
takes a subset k of the stages is delayed by sum(k) cycles, so the full
register spans every integer delay from 0 to 2**K - 1.

Rows are ordered fastest to slowest from top to bottom.  The crossing
geometry is diagonal, which limits how many stages each row can reach:
a photon from row i (1-based, out of S rows) can take at most i - 1
stages, and the rows near the bottom are forced through the closing
stages, at least K - (S - i) of them.  Everything in this module follows
from that counting window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ParameterError

__all__ = [
    "DelayPath",
    "DelaySet",
    "RegisterTopology",
    "accessible_delays",
    "enumerate_delay_paths",
    "step_count_bounds",
    "verify_monotone_assignment",
]


@dataclass(frozen=True)
class RegisterTopology:
    """Geometry of one source bank and its delay register.

    Parameters
    ----------
    source_count : int
        Number of source rows S, at least 1.
    step_count : int
        Number of binary delay stages K, at least 1.
    """

    source_count: int
    step_count: int
    step_delays: tuple[int, ...] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.source_count < 1:
            raise ParameterError(f"source count must be at least 1, got {self.source_count}")
        if self.step_count < 1:
            raise ParameterError(f"step count must be at least 1, got {self.step_count}")
        object.__setattr__(
            self, "step_delays", tuple(2**j for j in range(self.step_count))
        )

    @property
    def delay_count(self) -> int:
        """Number of distinct delays the register spans."""
        return 2**self.step_count

    @property
    def max_delay(self) -> int:
        return 2**self.step_count - 1

    @cached_property
    def access_table(self) -> np.ndarray:
        """Boolean matrix, entry [i - 1, d] true when row i can reach delay d."""
        table = np.zeros((self.source_count, self.delay_count), dtype=bool)
        for source in range(1, self.source_count + 1):
            low, high = step_count_bounds(self, source)
            for delay in range(self.delay_count):
                taken = delay.bit_count()
                table[source - 1, delay] = low <= taken <= high
        table.flags.writeable = False
        return table

    def can_reach(self, source: int, delay: int) -> bool:
        """True when ``source`` (1-based) can exit with the given delay."""
        _check_source(self, source)
        if not 0 <= delay <= self.max_delay:
            return False
        return bool(self.access_table[source - 1, delay])


def _check_source(topology: RegisterTopology, source: int) -> int:
    if source != int(source) or not 1 <= source <= topology.source_count:
        raise ParameterError(
            f"source index must be in [1, {topology.source_count}], got {source!r}"
        )
    return int(source)


def step_count_bounds(topology: RegisterTopology, source: int) -> tuple[int, int]:
    """Smallest and largest number of stages a row's photon can take.

    Returns the inclusive window (low, high).  Rows in the interior of a
    tall bank see the full window (0, K); rows within K of either edge
    are clipped by the crossing geometry.
    """
    i = _check_source(topology, source)
    s = topology.source_count
    k = topology.step_count
    low = max(0, k - (s - i))
    high = min(k, i - 1)
    return low, high


class DelaySet(NamedTuple):
    """Reachable delays for one source row."""

    source: int
    delays: frozenset[int]


def accessible_delays(topology: RegisterTopology, source: int) -> DelaySet:
    """Every delay value a given row can be routed to.

    A delay d is reachable exactly when its binary popcount lies inside
    the row's stage-count window, since each set bit of d corresponds to
    taking one distinct stage.
    """
    i = _check_source(topology, source)
    low, high = step_count_bounds(topology, i)
    delays = frozenset(
        d for d in range(topology.delay_count) if low <= d.bit_count() <= high
    )
    return DelaySet(source=i, delays=delays)


class DelayPath(NamedTuple):
    """One concrete route through the register: total delay plus the stages taken."""

    delay: int
    steps: tuple[int, ...]


def enumerate_delay_paths(topology: RegisterTopology, source: int) -> tuple[DelayPath, ...]:
    """All stage subsets a row can take, one path per subset.

    Stage delays are distinct powers of two, so paths map one-to-one onto
    reachable delay values.  Paths come back sorted by total delay.
    """
    i = _check_source(topology, source)
    low, high = step_count_bounds(topology, i)
    paths = []
    for size in range(low, high + 1):
        for steps in combinations(topology.step_delays, size):
            paths.append(DelayPath(delay=sum(steps), steps=steps))
    return tuple(sorted(paths))


def verify_monotone_assignment(assignments: Sequence[tuple[int, int]]) -> bool:
    """Check that routed (source, delay) pairs never cross.

    Sorting by source index must give strictly increasing delays: the
    fastest row that fires takes the shortest delay still open, and so on
    down the stack.  A plan with crossings would need some photon pair to
    swap register positions twice, which the hardware cannot do.

    Raises
    ------
    ParameterError
        If any source index or delay value appears twice.
    """
    sources = [s for s, _ in assignments]
    delays = [d for _, d in assignments]
    if len(set(sources)) != len(sources):
        raise ParameterError("assignment reuses a source index")
    if len(set(delays)) != len(delays):
        raise ParameterError("assignment reuses a delay value")
    ordered = sorted(assignments)
    return all(a[1] < b[1] for a, b in zip(ordered, ordered[1:]))


@lru_cache(maxsize=64)
def _cached_topology(source_count: int, step_count: int) -> RegisterTopology:
    # shared instances keep the access table cache warm across cycles
    return RegisterTopology(source_count=source_count, step_count=step_count)
