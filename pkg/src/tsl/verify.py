"""Runnable oracles for the proved inequalities, and the orbit-visit checker.

The inequality oracles evaluate both sides of their statements literally,
with no algebraic simplification, so a failure indicts the implementation
rather than the statement.  `check_visit` measures how far an orbit point
of the shift lands from its target polynomial on the target's test
circle, and adds an explicit bound for the part of the orbit lost to
truncation instead of pretending the finite series is the infinite one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from tsl.constructor import (
    BlockLedger,
    ConstructionSpec,
    VisitReport,
    iter_plan,
    visit_set,
)
from tsl.errors import DomainError
from tsl.polybank import TargetEnumeration, index_weighted
from tsl.series import CoefficientSeries, ShiftParams, apply_shift_power

_REL_GUARD = 1e-9  # tolerance for pure floating-point noise in literal comparisons
_VISIT_SAMPLES = 4096


@dataclass(frozen=True)
class OracleVerdict:
    holds: bool
    margin: float
    witness: Optional[dict] = None

    def __post_init__(self) -> None:
        if self.holds and self.witness is not None:
            raise DomainError("witness only accompanies a violation")
        if not self.holds and self.witness is None:
            raise DomainError("violations must carry a witness")


def power_sum_lower_bound(members: np.ndarray, n: int, gamma: float) -> OracleVerdict:
    """Check sum over the subset of (k+1)**gamma against its integral minorant.

    The two displayed bounds split at gamma = 0; both degenerate at
    gamma = -1 (division by gamma + 1), which is rejected.
    """
    if gamma == -1.0:
        raise DomainError("gamma = -1 is outside the statement")
    members = np.asarray(members, dtype=np.int64)
    if members.size and (members.min() < 1 or members.max() > n):
        raise DomainError("subset must lie in {1, ..., N}")
    count = members.size
    lhs = float(np.sum((members.astype(np.float64) + 1.0) ** gamma))
    if gamma >= 0.0:
        rhs = ((count + 1.0) ** (gamma + 1.0) - 1.0) / (gamma + 1.0)
    else:
        rhs = ((n + 2.0) ** (gamma + 1.0) / (gamma + 1.0)) * (
            1.0 - (1.0 - count / (n + 2.0)) ** (gamma + 1.0)
        )
    margin = lhs - rhs
    holds = margin >= -_REL_GUARD * max(1.0, abs(rhs))
    witness = None if holds else {"n": n, "gamma": gamma, "count": int(count), "lhs": lhs, "rhs": rhs}
    return OracleVerdict(holds=holds, margin=margin, witness=witness)


def abel_minorant(
    u: np.ndarray, v: np.ndarray, subseq: np.ndarray
) -> OracleVerdict:
    """Check the summation-by-parts lower bound along an index subsequence.

    `u`, `v` are 1-indexed nonnegative sequences (v nonincreasing), and
    `subseq` is N_0 < N_1 < ... < N_l inside [1, len].  Both sides of

        sum_{k=N_0+1}^{N_l} u_k v_k  >=  S_{N_l} v_{N_l} - S_{N_0} v_{N_0}
            + sum_j S_{N_{j-1}} (v_{N_{j-1}} - v_{N_j})

    are evaluated literally, with S the running sum of u.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    subseq = np.asarray(subseq, dtype=np.int64)
    if len(u) != len(v):
        raise DomainError("u and v must have equal length")
    if np.any(u < 0) or np.any(v < 0):
        raise DomainError("sequences must be nonnegative")
    if np.any(np.diff(v) > 0):
        raise DomainError("v must be nonincreasing")
    if len(subseq) < 2 or np.any(np.diff(subseq) <= 0):
        raise DomainError("need a strictly increasing subsequence N_0 < ... < N_l")
    if subseq[0] < 1 or subseq[-1] > len(u):
        raise DomainError("subsequence indices must lie in [1, len]")
    s = np.cumsum(u)  # s[i] = S_{i+1}
    n0, nl = int(subseq[0]), int(subseq[-1])
    lhs = float(np.sum(u[n0:nl] * v[n0:nl]))
    rhs = float(s[nl - 1] * v[nl - 1] - s[n0 - 1] * v[n0 - 1])
    prev = subseq[:-1]
    nxt = subseq[1:]
    rhs += float(np.sum(s[prev - 1] * (v[prev - 1] - v[nxt - 1])))
    margin = lhs - rhs
    holds = margin >= -_REL_GUARD * max(1.0, abs(rhs))
    witness = None if holds else {"len": len(u), "subseq": subseq.tolist(), "lhs": lhs, "rhs": rhs}
    return OracleVerdict(holds=holds, margin=margin, witness=witness)


@dataclass(frozen=True)
class AsymptoticProbe:
    """Data feeding the lacunary-sum comparison.

    `a(n)` is a bounded nonnegative sequence with divergent sum, the
    exponent schedule puts mass at degrees 2**u(n), and `h_inverse`
    inverts the continuous interpolant of n -> u(n) composed with exp2,
    i.e. h_inverse(2**u(n)) = n.
    """

    a: Callable[[int], float]
    u: Callable[[int], int]
    h_inverse: Callable[[float], float]

    def theta(self, x: float) -> float:
        """Prefix sum of a up to floor(x)."""
        if x < 0:
            return 0.0
        return float(sum(self.a(i) for i in range(int(math.floor(x)) + 1)))

    def check_prefix(self, upto: int = 24) -> None:
        """Degree ratios 2**(u(n+1)-u(n)) must reach and keep >= 4 past index 3."""
        gaps = [self.u(i + 1) - self.u(i) for i in range(upto)]
        if any(g <= 0 for g in gaps):
            raise DomainError("schedule must be strictly increasing")
        bad = [i for i in range(3, upto) if gaps[i] < 2]
        if bad:
            raise DomainError(f"degree ratio below 4 at index {bad[0]}")


def unit_quadratic_probe() -> AsymptoticProbe:
    """a = 1, u(n) = n**2; h_inverse(y) = sqrt(log2(y))."""
    return AsymptoticProbe(
        a=lambda n: 1.0,
        u=lambda n: n * n,
        h_inverse=lambda y: math.sqrt(max(0.0, math.log2(y))),
    )


def lacunary_sum_ratio(probe: AsymptoticProbe, r: float) -> float:
    """Ratio of sum a_n r**(2**u(n)) to its prefix-sum prediction.

    Terms are accumulated through exponent * log r until they fall below
    1e-300; powers are never formed directly, so huge exponents cannot
    overflow.  The prediction is theta(h_inverse(1/(1-r))).
    """
    probe.check_prefix()
    if not (0.0 < r < 1.0):
        raise DomainError("radius must lie in (0, 1)")
    if r < 1.0 - 2.0 ** -int(probe.u(3)):
        raise DomainError("radius too small for the probed schedule; need r >= 1 - 2**-u(3)")
    log_r = math.log(r)
    ln_neg = math.log(-log_r)
    total = 0.0
    n = 0
    while True:
        ln_mag = probe.u(n) * math.log(2.0) + ln_neg  # ln(2**u(n) * |log r|)
        expo = -math.exp(ln_mag) if ln_mag < 710.0 else -math.inf
        term = math.exp(expo) if expo > -691.0 else 0.0  # e^-691 ~ 1e-300
        if term < 1e-300:
            break
        total += probe.a(n) * term
        n += 1
    denom = probe.theta(probe.h_inverse(1.0 / (1.0 - r)))
    if denom <= 0:
        raise DomainError("prediction is zero on this prefix")
    return total / denom


def _sample_circle(coeffs: np.ndarray, radius: float, size: int) -> np.ndarray:
    """Polynomial values at `size` equispaced points of the radius-`radius` circle."""
    j = np.arange(len(coeffs), dtype=np.float64)
    if radius == 0.0:
        return np.full(size, coeffs[0])
    dilated = coeffs * np.exp(j * math.log(radius))
    pad = (-len(dilated)) % size
    folded = np.concatenate([dilated, np.zeros(pad, dtype=np.complex128)])
    folded = folded.reshape(-1, size).sum(axis=0)
    return np.fft.ifft(folded) * size


def truncation_tail_bound(
    spec: ConstructionSpec,
    targets: TargetEnumeration,
    s: int,
    radius: float,
    max_degree: int,
) -> float:
    """Bound on the orbit coordinates lost to truncation at max_degree.

    Sums, over blocks the truncation dropped, an envelope bound
    max|c| * (i - s + 1)**(-alpha) * radius**(i - s) across the block's
    occupied indices i; blocks beyond the radius' reach add hard zeros
    and stop the scan.
    """
    if radius == 0.0:
        return 0.0
    log_rho = math.log(radius)
    total = 0.0
    for rec in iter_plan(spec, targets):
        gap = min(rec.lo - s, 1 << 60)  # clamp before the int -> float product
        if rec.lo > max_degree and gap * log_rho < -745.0:
            break
        if not rec.built or rec.hi <= max_degree:
            continue
        assert rec.k is not None and rec.gate is not None and rec.budget is not None
        entry = targets.entry(rec.k)
        weighted = index_weighted(entry.series, spec.alpha).coefficients
        c_max = float(np.max(np.abs(weighted))) if len(weighted) else 0.0
        if c_max == 0.0:
            continue
        start = max(rec.lo, max_degree + 1)
        if start <= s:
            continue
        head = (start - s) * log_rho
        if head < -745.0:
            continue
        # geometric tail over the gate-strided support, envelope at the worst index
        x = math.exp(min(0.0, rec.gate * log_rho))
        geo = min(float(rec.budget), 1.0 / (1.0 - x)) if x < 1.0 else float(rec.budget)
        span_end = rec.lo + rec.gate * (rec.budget - 1) + entry.degree
        if spec.alpha >= 0:
            env = (start - s + 1.0) ** (-spec.alpha)
        else:
            env = (span_end - s + 1.0) ** (-spec.alpha)
        total += c_max * (entry.degree + 1) * env * math.exp(head) * geo
    return total


def check_visit(
    f: CoefficientSeries,
    spec: ConstructionSpec,
    targets: TargetEnumeration,
    k: int,
    s: int,
) -> float:
    """Sup distance of the s-th orbit point from target k on its test circle.

    Applies the closed-form shift power, samples |orbit - target| on 4096
    equispaced points of the circle of radius 1 - 1/l_k, and returns the
    sampled maximum plus the truncation-tail bound.
    """
    if s > f.max_degree:
        raise DomainError("visit time exceeds the series degree")
    if s < 0:
        raise DomainError("visit time must be >= 0")
    entry = targets.entry(k)
    radius = 1.0 - 1.0 / entry.l_bound
    orbit = apply_shift_power(f, s, ShiftParams(spec.alpha))
    g_samples = _sample_circle(orbit.coefficients, radius, _VISIT_SAMPLES)
    q_samples = _sample_circle(entry.series.coefficients, radius, _VISIT_SAMPLES)
    err = float(np.max(np.abs(g_samples - q_samples)))
    return err + truncation_tail_bound(spec, targets, s, radius, f.max_degree)


def visit_report(
    f: CoefficientSeries,
    spec: ConstructionSpec,
    targets: TargetEnumeration,
    k: int,
    ledger: BlockLedger,
) -> VisitReport:
    """Visit set of target k with every visit's sup error filled in."""
    report = visit_set(spec, targets, k, ledger)
    errors = tuple(check_visit(f, spec, targets, k, s) for s in report.visits)
    return replace(report, sup_errors=errors)


def _spawn_rngs(master_seed: int, count: int) -> list[np.random.Generator]:
    seqs = np.random.SeedSequence(master_seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(sq)) for sq in seqs]


def run_power_sum_suite(
    n_instances: int, master_seed: int, n_max: int = 10_000
) -> list[OracleVerdict]:
    """Randomized instances of the power-sum bound; gamma in [-0.9, 3]."""
    verdicts = []
    for rng in _spawn_rngs(master_seed, n_instances):
        n = int(rng.integers(1, n_max + 1))
        density = float(rng.uniform(0.0, 1.0))
        members = np.nonzero(rng.random(n) < density)[0] + 1
        gamma = float(rng.uniform(-0.9, 3.0))
        verdicts.append(power_sum_lower_bound(members, n, gamma))
    return verdicts


def run_abel_suite(
    n_instances: int, master_seed: int, max_len: int = 2000
) -> list[OracleVerdict]:
    """Randomized instances of the summation-by-parts bound."""
    verdicts = []
    for rng in _spawn_rngs(master_seed, n_instances):
        length = int(rng.integers(2, max_len + 1))
        u = rng.random(length) * float(rng.uniform(0.5, 10.0))
        steps = rng.random(length)
        v = np.flip(np.cumsum(np.flip(steps)))  # nonincreasing, nonnegative
        n_points = int(rng.integers(2, min(length, 12) + 1))
        subseq = np.sort(rng.choice(np.arange(1, length + 1), size=n_points, replace=False))
        verdicts.append(abel_minorant(u, v, subseq))
    return verdicts
