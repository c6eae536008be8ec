"""Pair emission statistics for a bank of heralded SPDC sources.

Each source is pumped identically and emits photon pairs with Poisson
statistics per clock cycle.  One arm of every pair goes to a herald
detector, the other into the switching network.  The herald detectors
click without resolving photon number, so a click means "one or more
pairs" and nothing finer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError

__all__ = [
    "EmissionBatch",
    "HeraldProbabilities",
    "HeraldReport",
    "herald",
    "herald_probabilities",
    "pair_pmf",
    "sample_cycle_emissions",
]


def _check_mean_pairs(mean_pairs: float) -> float:
    mean = float(mean_pairs)
    if not math.isfinite(mean) or mean <= 0.0:
        raise ParameterError(f"mean pair number must be positive and finite, got {mean_pairs!r}")
    return mean


def pair_pmf(count: int, mean_pairs: float) -> float:
    """Probability of emitting exactly ``count`` pairs in one cycle.

    Parameters
    ----------
    count : int
        Number of pairs, non-negative.
    mean_pairs : float
        Mean pairs per cycle, positive.

    Returns
    -------
    float
        ``mean_pairs**count * exp(-mean_pairs) / count!``
    """
    if count != int(count) or count < 0:
        raise ParameterError(f"pair count must be a non-negative integer, got {count!r}")
    mean = _check_mean_pairs(mean_pairs)
    n = int(count)
    # log form keeps large counts from overflowing the numerator
    return math.exp(n * math.log(mean) - mean - math.lgamma(n + 1))


class HeraldProbabilities(NamedTuple):
    """Per-source, per-cycle click probabilities."""

    p_herald: float
    p_multi: float


def herald_probabilities(mean_pairs: float) -> HeraldProbabilities:
    """Herald click probability and multi-pair probability for one source.

    ``p_herald`` is the chance of at least one pair, ``p_multi`` the chance
    of two or more.  Both are per cycle.
    """
    mean = _check_mean_pairs(mean_pairs)
    p_herald = -math.expm1(-mean)
    p_multi = p_herald - mean * math.exp(-mean)
    return HeraldProbabilities(p_herald=p_herald, p_multi=p_multi)


@dataclass(frozen=True, eq=False)
class EmissionBatch:
    """Pair counts for every source in a single clock cycle."""

    pair_counts: np.ndarray
    mean_pairs: float
    cycle_index: int = 0

    def __post_init__(self) -> None:
        counts = np.asarray(self.pair_counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0:
            raise ParameterError("pair_counts must be a non-empty 1-D array")
        if np.any(counts < 0):
            raise ParameterError("pair counts cannot be negative")
        _check_mean_pairs(self.mean_pairs)
        if self.cycle_index < 0:
            raise ParameterError(f"cycle index cannot be negative, got {self.cycle_index}")
        counts = counts.copy()
        counts.flags.writeable = False
        object.__setattr__(self, "pair_counts", counts)

    @property
    def source_count(self) -> int:
        return int(self.pair_counts.size)


def sample_cycle_emissions(
    source_count: int,
    mean_pairs: float,
    rng: np.random.Generator,
    *,
    cycle_index: int = 0,
) -> EmissionBatch:
    """Draw one cycle of Poisson pair counts for the whole source bank.

    Uses inversion by sequential search so that exactly one uniform variate
    is consumed per source, in source order.  That makes the draw count a
    fixed function of the configuration, which keeps seeded runs replayable
    even if the generator is shared with other consumers.

    Parameters
    ----------
    source_count : int
        Number of sources in the bank, at least 1.
    mean_pairs : float
        Mean pairs per source per cycle.
    rng : numpy.random.Generator
        Seeded generator supplying the uniforms.
    cycle_index : int, optional
        Cycle label copied onto the batch.

    Returns
    -------
    EmissionBatch
    """
    if source_count < 1:
        raise ParameterError(f"source count must be at least 1, got {source_count}")
    mean = _check_mean_pairs(mean_pairs)
    if not isinstance(rng, np.random.Generator):
        raise ParameterError("rng must be a numpy.random.Generator")

    u = rng.random(int(source_count))
    counts = np.zeros(int(source_count), dtype=np.int64)
    term = math.exp(-mean)
    cumulative = term
    n = 0
    pending = u > cumulative
    while pending.any():
        n += 1
        term *= mean / n
        if term <= 0.0:
            # cumulative sum saturated in floats; the remaining tail mass
            # is below resolution, park the stragglers at the current count
            counts[pending] = n
            break
        cumulative += term
        counts[pending] = n
        pending = u > cumulative
    return EmissionBatch(pair_counts=counts, mean_pairs=mean, cycle_index=cycle_index)


@dataclass(frozen=True, eq=False)
class HeraldReport:
    """Detector-side view of one cycle.

    ``heralded`` is all a scheduler is allowed to look at: the detectors
    cannot count photons, so routing decisions must not depend on
    ``multiplicity``.  The multiplicity array exists purely so that error
    accounting can tell singles from multi-pair events after the fact.
    """

    heralded: np.ndarray
    multiplicity: np.ndarray
    cycle_index: int = 0

    def __post_init__(self) -> None:
        heralded = np.asarray(self.heralded, dtype=bool)
        multiplicity = np.asarray(self.multiplicity, dtype=np.int64)
        if heralded.ndim != 1 or heralded.size == 0:
            raise ParameterError("heralded must be a non-empty 1-D array")
        if multiplicity.shape != heralded.shape:
            raise ParameterError("multiplicity and heralded must have the same shape")
        if np.any(multiplicity < 0):
            raise ParameterError("multiplicity cannot be negative")
        if not np.array_equal(heralded, multiplicity >= 1):
            raise ParameterError("heralded flags must equal multiplicity >= 1")
        heralded = heralded.copy()
        multiplicity = multiplicity.copy()
        heralded.flags.writeable = False
        multiplicity.flags.writeable = False
        object.__setattr__(self, "heralded", heralded)
        object.__setattr__(self, "multiplicity", multiplicity)
        if self.cycle_index < 0:
            raise ParameterError(f"cycle index cannot be negative, got {self.cycle_index}")

    @property
    def source_count(self) -> int:
        return int(self.heralded.size)

    @property
    def herald_count(self) -> int:
        return int(np.count_nonzero(self.heralded))


def herald(batch: EmissionBatch) -> HeraldReport:
    """Threshold a cycle of pair counts into herald clicks."""
    counts = batch.pair_counts
    return HeraldReport(
        heralded=counts >= 1,
        multiplicity=counts,
        cycle_index=batch.cycle_index,
    )
