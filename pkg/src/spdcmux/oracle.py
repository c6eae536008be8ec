"""Exact steady-state rates via a storage-level Markov chain.

For a bank where every row can reach every register position, the only
state that matters between cycles is how many photons sit in storage.
Heralds per cycle are binomial, the train fills greedily, surplus goes
to storage up to capacity, and the rest is discarded.  That gives a
small (capacity + 1)-state chain whose stationary distribution yields
the exact lack rate; the multi-pair rate follows because routing is
blind to multiplicities, so every filled slot carries a multi-pair event
with the same conditional probability p_multi / p_herald.

Edge rows of a real bank see restricted reachability, which this chain
ignores; it is the idealized interior-dominated limit and the natural
cross-check for the Monte Carlo engine run without boundary limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .emission import herald_probabilities
from .errors import ConvergenceError, ParameterError
from .scheduler import storage_capacity

__all__ = [
    "ChainSpec",
    "OracleRates",
    "herald_count_distribution",
    "optimized_power",
    "stationary_distribution",
    "stationary_rates",
    "transition_matrix",
]


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of the storage-level chain."""

    source_count: int
    multiple: int
    capacity: int
    p_herald: float
    p_multi: float

    def __post_init__(self) -> None:
        if self.source_count < 1:
            raise ParameterError(f"source count must be at least 1, got {self.source_count}")
        if self.multiple < 1:
            raise ParameterError(f"multiple must be at least 1, got {self.multiple}")
        if self.capacity < 0:
            raise ParameterError(f"capacity cannot be negative, got {self.capacity}")
        if not 0.0 < self.p_herald < 1.0:
            raise ParameterError(f"p_herald must lie strictly in (0, 1), got {self.p_herald}")
        if not 0.0 <= self.p_multi < self.p_herald:
            raise ParameterError("p_multi must lie in [0, p_herald)")

    @classmethod
    def from_mean_pairs(
        cls,
        source_count: int,
        multiple: int,
        step_count: int,
        mean_pairs: float,
    ) -> "ChainSpec":
        """Build the chain for a concrete device configuration."""
        capacity = storage_capacity(step_count, multiple)
        probs = herald_probabilities(mean_pairs)
        return cls(
            source_count=source_count,
            multiple=int(multiple),
            capacity=capacity,
            p_herald=probs.p_herald,
            p_multi=probs.p_multi,
        )


class OracleRates(NamedTuple):
    """Steady-state error rates and storage occupancy."""

    lack_rate: float
    multi_rate: float
    relative_multi_rate: float
    mean_storage: float


def herald_count_distribution(source_count: int, p_herald: float) -> np.ndarray:
    """Exact binomial pmf of the number of heralds in one cycle."""
    if source_count < 1:
        raise ParameterError(f"source count must be at least 1, got {source_count}")
    if not 0.0 < p_herald < 1.0:
        raise ParameterError(f"p_herald must lie strictly in (0, 1), got {p_herald}")
    pmf = np.empty(source_count + 1)
    for h in range(source_count + 1):
        pmf[h] = (
            math.comb(source_count, h)
            * p_herald**h
            * (1.0 - p_herald) ** (source_count - h)
        )
    return pmf


def _chain_tables(spec: ChainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix over storage levels plus expected lacks per level."""
    pmf = herald_count_distribution(spec.source_count, spec.p_herald)
    size = spec.capacity + 1
    matrix = np.zeros((size, size))
    lack_given_level = np.zeros(size)
    for level in range(size):
        for heralds, weight in enumerate(pmf):
            available = level + heralds
            filled = min(spec.multiple, available)
            next_level = min(spec.capacity, available - filled)
            matrix[level, next_level] += weight
            lack_given_level[level] += weight * (spec.multiple - filled)
    return matrix, lack_given_level


def transition_matrix(spec: ChainSpec) -> np.ndarray:
    """One-cycle transition matrix of the storage level."""
    matrix, _ = _chain_tables(spec)
    return matrix


def stationary_distribution(
    matrix: np.ndarray,
    *,
    tolerance: float = 1e-12,
    max_iterations: int = 200_000,
) -> np.ndarray:
    """Stationary row vector of a stochastic matrix by power iteration.

    Raises
    ------
    ConvergenceError
        If successive iterates do not settle within ``max_iterations``.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ParameterError("transition matrix must be square")
    size = matrix.shape[0]
    pi = np.full(size, 1.0 / size)
    for _ in range(max_iterations):
        nxt = pi @ matrix
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tolerance:
            return nxt
        pi = nxt
    raise ConvergenceError(
        f"power iteration did not reach {tolerance} in {max_iterations} iterations"
    )


def stationary_rates(spec: ChainSpec) -> OracleRates:
    """Exact steady-state lack and multi-pair rates of the idealized bank.

    Parameters
    ----------
    spec : ChainSpec

    Returns
    -------
    OracleRates
        Rates per emitted slot plus the mean storage occupancy.
    """
    matrix, lack_given_level = _chain_tables(spec)
    pi = stationary_distribution(matrix)
    lack_rate = float(pi @ lack_given_level) / spec.multiple
    relative = spec.p_multi / spec.p_herald
    multi_rate = relative * (1.0 - lack_rate)
    mean_storage = float(pi @ np.arange(spec.capacity + 1))
    return OracleRates(
        lack_rate=lack_rate,
        multi_rate=multi_rate,
        relative_multi_rate=relative,
        mean_storage=mean_storage,
    )


# expanding the pump bracket beyond ~32 mean pairs would round p_herald
# to exactly 1.0 in floats and the chain degenerates
_MAX_MEAN = 32.0


def optimized_power(
    source_count: int,
    multiple: int,
    step_count: int = 3,
    *,
    tolerance: float = 1e-6,
) -> float:
    """Pump level where the lack rate equals the multi-pair rate.

    Lack falls and multi-pair rises monotonically with pump power, so the
    two curves cross exactly once; the crossing is the operating point
    that minimises the larger of the two errors.  Solved by bisection on
    lack - multi, starting from the bracket (1e-6, 1] and doubling the
    upper end while both rates still sit on the same side (small banks
    can push the crossing above one mean pair per cycle).

    Returns
    -------
    float
        Mean pair number at the crossing.

    Raises
    ------
    ConvergenceError
        If no sign change is found below the bracket cap or bisection
        stalls without reaching ``tolerance``.
    """
    if tolerance <= 0.0:
        raise ParameterError(f"tolerance must be positive, got {tolerance}")

    def gap(mean: float) -> float:
        spec = ChainSpec.from_mean_pairs(source_count, multiple, step_count, mean)
        rates = stationary_rates(spec)
        return rates.lack_rate - rates.multi_rate

    low, high = 1e-6, 1.0
    gap_low = gap(low)
    if gap_low <= 0.0:
        raise ConvergenceError(
            "lack does not exceed multi even at vanishing pump; no crossing to find"
        )
    while gap(high) > 0.0:
        high *= 2.0
        if high > _MAX_MEAN:
            raise ConvergenceError(
                f"no lack/multi crossing below mean pair number {_MAX_MEAN}"
            )

    for _ in range(200):
        mid = 0.5 * (low + high)
        gap_mid = gap(mid)
        if abs(gap_mid) < tolerance:
            return mid
        if gap_mid > 0.0:
            low = mid
        else:
            high = mid
    raise ConvergenceError(
        f"bisection failed to bring |lack - multi| under {tolerance}"
    )
