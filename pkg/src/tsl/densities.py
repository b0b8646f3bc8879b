"""Weighted upper densities with weights exp(n**gamma), 0 <= gamma <= 1.

All sums are carried as log-sum-exp values: exp(n**gamma) overflows
doubles near n = 700 already for gamma = 1, while the quantities of
interest (prefix ratios) live entirely in exponent differences.  The
limsup itself is not computable; callers report maxima of prefix ratios
along dyadic horizons and label them as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tsl.errors import DomainError

_CHUNK = 1 << 22


@dataclass(frozen=True)
class DensitySpec:
    """Weight exponent gamma; gamma = 0 reproduces the natural density."""

    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.gamma <= 1.0):
            raise DomainError("gamma must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class PrefixSet:
    """Finite surrogate of an integer set: sorted members inside [1, n_max]."""

    members: np.ndarray
    n_max: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.members, dtype=np.int64)
        if arr.ndim != 1:
            raise DomainError("members must be 1-d")
        if arr.size:
            if arr[0] < 1 or arr[-1] > self.n_max:
                raise DomainError("members must lie in [1, n_max]")
            if np.any(np.diff(arr) <= 0):
                raise DomainError("members must be strictly increasing")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "members", arr)


def _log_sum_exp_weights(values: np.ndarray, gamma: float) -> float:
    """log sum of exp(k**gamma) over the given integers, streamed in chunks."""
    if values.size == 0:
        return -math.inf
    total = -math.inf
    for lo in range(0, values.size, _CHUNK):
        chunk = values[lo : lo + _CHUNK].astype(np.float64)
        w = np.power(chunk, gamma)
        m = float(w.max())
        total = float(np.logaddexp(total, m + math.log(float(np.exp(w - m).sum()))))
    return total


def log_weight_sum(n: int, gamma: float) -> float:
    """log of sum_{k=1..n} exp(k**gamma), never materialized in linear scale."""
    if n < 1:
        raise DomainError("prefix length must be >= 1")
    if not (0.0 <= gamma <= 1.0):
        raise DomainError("gamma must lie in [0, 1]")
    total = -math.inf
    for lo in range(1, n + 1, _CHUNK):
        hi = min(n, lo + _CHUNK - 1)
        w = np.power(np.arange(lo, hi + 1, dtype=np.float64), gamma)
        m = float(w.max())
        total = float(np.logaddexp(total, m + math.log(float(np.exp(w - m).sum()))))
    return total


def prefix_density(prefix_set: PrefixSet, gamma: float, n: int) -> float:
    """Weighted mass of the set inside [1, n] over the full weighted mass."""
    if n > prefix_set.n_max:
        raise DomainError(f"horizon {n} exceeds the set's n_max {prefix_set.n_max}")
    if n < 1:
        raise DomainError("horizon must be >= 1")
    members = prefix_set.members
    members = members[members <= n]
    log_num = _log_sum_exp_weights(members, gamma)
    if log_num == -math.inf:
        return 0.0
    log_den = log_weight_sum(n, gamma)
    return min(1.0, math.exp(log_num - log_den))


def prefix_density_profile(
    prefix_set: PrefixSet, gamma: float, horizons: list[int]
) -> list[tuple[int, float, float, float]]:
    """Rows (N, ratio, log_num, log_den) for each horizon, one weight pass each."""
    out = []
    for n in horizons:
        if n > prefix_set.n_max:
            raise DomainError(f"horizon {n} exceeds the set's n_max {prefix_set.n_max}")
        members = prefix_set.members
        members = members[members <= n]
        log_num = _log_sum_exp_weights(members, gamma)
        log_den = log_weight_sum(n, gamma)
        ratio = 0.0 if log_num == -math.inf else min(1.0, math.exp(log_num - log_den))
        out.append((n, ratio, log_num, log_den))
    return out


def separating_set(gamma: float, n_max: int) -> PrefixSet:
    """Dyadic-tail set with positive gamma-density and vanishing density below.

    Union of the integer intervals [2**n - floor(2**(n*(1-gamma))), 2**n]
    over n > 1/gamma, clipped to [1, n_max]; for gamma = 1 the intervals
    degenerate to the dyadic points themselves.
    """
    if not (0.0 < gamma <= 1.0):
        raise DomainError("separating_set requires 0 < gamma <= 1")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    if gamma == 1.0:
        powers = []
        p = 2
        while p <= n_max:
            powers.append(p)
            p <<= 1
        return PrefixSet(np.array(powers, dtype=np.int64), n_max)
    pieces = []
    n = int(1.0 / gamma) + 1
    while True:
        width = int(math.floor(2.0 ** (n * (1.0 - gamma))))
        lo = (1 << n) - width
        if lo > n_max:
            break
        hi = min(1 << n, n_max)
        pieces.append(np.arange(max(1, lo), hi + 1, dtype=np.int64))
        n += 1
    if not pieces:
        return PrefixSet(np.array([], dtype=np.int64), n_max)
    members = np.unique(np.concatenate(pieces))
    return PrefixSet(members, n_max)
