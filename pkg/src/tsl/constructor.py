"""Block construction of the truncated model functions.

The function is a sum of polynomials with pairwise disjoint coefficient
supports: block n occupies indices [2**n, 2**(n+1)) on the dyadic
schedule, or [2**u(n), 2**u(n+1)) on an explicit integer schedule u.
Even block numbers n = 2**k * odd are assigned to target k; a block is
built only once it is long enough to absorb its target, as decided by an
integer gate per target.  Inside a built block the coefficients are

    (index + 1)**(-alpha) * c_t,    t = index - block_start,

where (c_t) are the coefficients of family(z**gate) * weighted_target(z),
family being a Rudin-Shapiro sign polynomial or a de la Vallee-Poussin
star polynomial of length

    budget = floor(base**(1 - gamma) / gate),

with base = 2**n on the dyadic schedule and base = 2**u(n) otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from io import StringIO
from typing import Callable, Optional

import numpy as np

from tsl.errors import ConstructionError, DomainError
from tsl.polybank import TargetEnumeration, index_weighted, rudin_shapiro, vdlp_star
from tsl.series import CoefficientSeries

_U_CHECK_PREFIX = 40


class Regime(Enum):
    RS = "rs"
    STAR = "star"


class Schedule(Enum):
    DYADIC = "dyadic"
    U_SCHEDULE = "u"


def quadratic_schedule(n: int) -> int:
    """Default explicit schedule u(n) = n**2; gaps 2n+1 grow without bound."""
    return n * n


@dataclass(frozen=True)
class ConstructionSpec:
    """All knobs of the block construction."""

    alpha: float
    gamma: float
    regime: Regime
    schedule: Schedule
    max_degree: int
    u: Optional[Callable[[int], int]] = None
    q: float = math.inf  # conjugate exponent; only the STAR gate reads it

    def __post_init__(self) -> None:
        if not np.isfinite(self.alpha):
            raise DomainError("alpha must be finite")
        if not (0.0 <= self.gamma < 1.0):
            raise DomainError("gamma must lie in [0, 1)")
        if self.max_degree < 4:
            raise DomainError("max_degree must be >= 4")
        if self.schedule is Schedule.U_SCHEDULE:
            if self.u is None:
                object.__setattr__(self, "u", quadratic_schedule)
            self._check_schedule()
        if self.q != math.inf and self.q < 1.0:
            raise DomainError("conjugate exponent must be >= 1 or infinity")

    def _check_schedule(self) -> None:
        assert self.u is not None
        vals = [int(self.u(n)) for n in range(_U_CHECK_PREFIX)]
        gaps = [b - a for a, b in zip(vals, vals[1:])]
        if any(g <= 0 for g in gaps):
            raise DomainError("schedule must be strictly increasing")
        if any(b < a for a, b in zip(gaps[2:], gaps[3:])):
            raise DomainError("schedule gaps must be nondecreasing beyond the checked prefix")

    def base_exponent(self, n: int) -> int:
        """log2 of the block start: n itself, or u(n) on an explicit schedule."""
        if self.schedule is Schedule.DYADIC:
            return n
        assert self.u is not None
        return int(self.u(n))


@dataclass(frozen=True)
class BlockRecord:
    """Ledger row for one block number (built or skipped)."""

    n: int
    k: Optional[int]
    gate: Optional[int]
    budget: Optional[int]
    lo: int
    hi: int
    skip_reason: Optional[str]  # None | unassigned | odd | gate | budget | max-degree

    @property
    def built(self) -> bool:
        return self.skip_reason is None


@dataclass(frozen=True)
class BlockLedger:
    records: tuple[BlockRecord, ...]

    def built(self) -> tuple[BlockRecord, ...]:
        return tuple(r for r in self.records if r.built)

    def for_target(self, k: int) -> tuple[BlockRecord, ...]:
        return tuple(r for r in self.records if r.k == k)

    def assert_disjoint_supports(self) -> None:
        prev_hi = -1
        for r in sorted(self.built(), key=lambda r: r.lo):
            if r.lo <= prev_hi:
                raise ConstructionError(f"block n={r.n} overlaps a previous block")
            prev_hi = r.hi

    def to_csv(self) -> str:
        out = StringIO()
        out.write("n,k,gate,budget,lo,hi,skip_reason\n")
        for r in self.records:
            row = [
                str(r.n),
                "" if r.k is None else str(r.k),
                "" if r.gate is None else str(r.gate),
                "" if r.budget is None else str(r.budget),
                str(r.lo),
                str(r.hi),
                "" if r.skip_reason is None else r.skip_reason,
            ]
            out.write(",".join(row) + "\n")
        return out.getvalue()


@dataclass(frozen=True)
class VisitReport:
    """Visit times of one target, with per-visit errors once checked."""

    k: int
    visits: tuple[int, ...]
    radius: float
    density_estimate: float
    sup_errors: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.sup_errors is not None:
            if len(self.sup_errors) != len(self.visits):
                raise DomainError("one error per visit required")
            if any(e < 0 for e in self.sup_errors):
                raise DomainError("sup errors must be nonnegative")


def two_adic_valuation(n: int) -> int:
    if n <= 0:
        raise DomainError("valuation needs n >= 1")
    return (n & -n).bit_length() - 1


def target_gate(l: int, d: int, alpha: float, regime: Regime, q: float = math.inf) -> int:
    """Integer threshold that delays target blocks until they fit.

    The sign-family gate takes l**2 * (1+d)**(2*max(alpha,0)) as its first
    argument; the star-family gate replaces the exponents 2 by the
    conjugate exponent q.  For q = infinity the star gate falls back to
    the exponent-2 form so it stays finite.
    """
    if l < 1:
        raise DomainError("gate bound l must be >= 1")
    if d < 0:
        raise DomainError("gate degree must be >= 0")
    a_plus = max(alpha, 0.0)
    if regime is Regime.RS or q == math.inf:
        first = float(l) ** 2 * (1.0 + d) ** (2.0 * a_plus)
    else:
        if q < 1.0:
            raise DomainError("conjugate exponent must be >= 1")
        first = float(l) ** q * (1.0 + d) ** (q * a_plus)
    second = d + max(3.0, 3.0 + alpha) * l * l + a_plus * l * math.log(1.0 + d)
    return 1 + math.floor(max(first, second))


def block_indices(
    n: int, spec: ConstructionSpec
) -> tuple[int, int, Optional[int]]:
    """Support interval [lo, hi] of block n, and its target index if any.

    Positive even n = 2**k * odd belongs to target k; odd n and n = 0
    carry no target.
    """
    if n < 0:
        raise DomainError("block number must be >= 0")
    lo = 1 << spec.base_exponent(n)
    hi = (1 << spec.base_exponent(n + 1)) - 1
    k = two_adic_valuation(n) if (n > 0 and n % 2 == 0) else None
    return lo, hi, k


def _effective_gate(spec: ConstructionSpec, l: int, d: int) -> int:
    gate = target_gate(l, d, spec.alpha, spec.regime, spec.q)
    if (
        spec.regime is Regime.STAR
        and spec.q == math.inf
        and spec.schedule is Schedule.U_SCHEDULE
    ):
        # sup-free regime on an explicit schedule: raise the gate above
        # 2**u(l) so the per-target tail stays summable
        assert spec.u is not None
        gate = max(gate, (1 << int(spec.u(l))) + 2)
    return gate


def _budget(spec: ConstructionSpec, n: int, gate: int) -> int:
    """floor(base**(1-gamma) / gate) as an exact integer, base = 2**base_exponent."""
    e = spec.base_exponent(n)
    x = e * (1.0 - spec.gamma)
    ix = int(math.floor(x))
    frac = x - ix
    # floor(2**x / gate) with 2**x split into integer and fractional parts;
    # the fractional factor enters through a 52-bit fixed-point scale
    scaled = int(math.floor(2.0**frac * (1 << 52)))
    return ((1 << ix) * scaled) // (gate << 52)


def _classify(
    n: int, spec: ConstructionSpec, targets: TargetEnumeration, strict: bool = True
) -> BlockRecord:
    """Gate/budget bookkeeping for block n, without touching coefficients."""
    lo, hi, k = block_indices(n, spec)
    if k is None:
        return BlockRecord(n, None, None, None, lo, hi, "odd" if n % 2 else "unassigned")
    if k > len(targets) and not strict:
        return BlockRecord(n, k, None, None, lo, hi, "no-target")
    entry = targets.entry(k)
    gate = _effective_gate(spec, entry.l_bound, entry.degree)
    prev = spec.base_exponent(n - 1)
    if (1 << prev) < gate:
        return BlockRecord(n, k, gate, None, lo, hi, "gate")
    budget = _budget(spec, n, gate)
    if budget == 0:
        return BlockRecord(n, k, gate, 0, lo, hi, "budget")
    return BlockRecord(n, k, gate, budget, lo, hi, None)


def build_block(
    n: int, spec: ConstructionSpec, targets: TargetEnumeration
) -> tuple[BlockRecord, Optional[np.ndarray]]:
    """One block's ledger record and its dense content (None when skipped).

    The content array covers [lo, lo + span]; the caller places it at lo.
    Raises ConstructionError if the product would overrun the interval.
    """
    record = _classify(n, spec, targets)
    if not record.built:
        return record, None
    assert record.k is not None and record.gate is not None and record.budget is not None
    entry = targets.entry(record.k)
    gate, budget = record.gate, record.budget
    weighted = index_weighted(entry.series, spec.alpha).coefficients
    d = entry.degree
    span = gate * (budget - 1) + d
    if record.lo + span > record.hi:
        raise ConstructionError(
            f"block n={n} (target {record.k}, budget {budget}) spans {span + 1} "
            f"coefficients but its interval holds {record.hi - record.lo + 1}"
        )
    if spec.regime is Regime.RS:
        family = rudin_shapiro(budget).coefficients.astype(np.float64)
    else:
        family = vdlp_star(budget).coefficients
    content = np.zeros(span + 1, dtype=np.complex128)
    # product of the gate-dilated family with the weighted target: the gate
    # exceeds the target degree, so each output index has a unique term
    for j in range(d + 1):
        if weighted[j] != 0:
            content[j : j + gate * budget : gate] = family * weighted[j]
    idx = record.lo + np.arange(span + 1, dtype=np.float64)
    content *= (idx + 1.0) ** (-spec.alpha)
    return record, content


def construct(
    spec: ConstructionSpec, targets: TargetEnumeration
) -> tuple[CoefficientSeries, BlockLedger]:
    """Sum of all blocks whose interval fits below max_degree.

    Blocks are disjoint, so the sum is a concatenation; blocks whose
    interval sticks out beyond max_degree are dropped and recorded.
    """
    arr = np.zeros(spec.max_degree + 1, dtype=np.complex128)
    records: list[BlockRecord] = []
    n = 0
    while True:
        lo, hi, _ = block_indices(n, spec)
        if lo > spec.max_degree:
            break
        if hi > spec.max_degree:
            rec = _classify(n, spec, targets)
            records.append(replace(rec, skip_reason="max-degree"))
            n += 1
            continue
        rec, content = build_block(n, spec, targets)
        records.append(rec)
        if content is not None:
            arr[rec.lo : rec.lo + len(content)] = content
        n += 1
    ledger = BlockLedger(tuple(records))
    ledger.assert_disjoint_supports()
    return CoefficientSeries(arr), ledger


def plan_blocks(
    spec: ConstructionSpec, targets: TargetEnumeration, n_limit: int
) -> BlockLedger:
    """Ledger for blocks 0..n_limit ignoring max_degree (nothing materialized).

    Budgets are exact integers and may be far too large to realize; the
    plan feeds the structured radial means and truncation-tail bounds.
    """
    return BlockLedger(tuple(_classify(n, spec, targets) for n in range(n_limit + 1)))


def iter_plan(spec: ConstructionSpec, targets: TargetEnumeration):
    """Endless stream of ledger records in block order; consumers break.

    Blocks whose target index falls beyond the enumeration are reported
    as skipped rather than raising, so tail scans past the enumerated
    horizon stay usable.
    """
    n = 0
    while True:
        yield _classify(n, spec, targets, strict=False)
        n += 1


def _family_plus_positions(spec: ConstructionSpec, budget: int) -> np.ndarray:
    if spec.regime is Regime.RS:
        return rudin_shapiro(budget).plus_positions()
    return vdlp_star(budget).plus_positions()


def visit_set(
    spec: ConstructionSpec,
    targets: TargetEnumeration,
    k: int,
    ledger: BlockLedger,
) -> VisitReport:
    """Visit times of target k: lo + gate*m over family coefficients +1.

    The density estimate is the maximum, over the target's built blocks,
    of the weighted prefix ratio of the visit set evaluated at the last
    visit of that block (a finite-horizon stand-in for the upper density
    along the block subsequence).
    """
    from tsl.densities import PrefixSet, prefix_density

    entry = targets.entry(k)
    visits: list[int] = []
    block_ends: list[int] = []
    for rec in ledger.for_target(k):
        if not rec.built:
            continue
        assert rec.gate is not None and rec.budget is not None
        positions = _family_plus_positions(spec, rec.budget)
        block_visits = rec.lo + rec.gate * positions
        if len(block_visits):
            visits.extend(int(s) for s in block_visits)
            block_ends.append(int(block_visits[-1]))
    radius = 1.0 - 1.0 / entry.l_bound
    if not visits:
        return VisitReport(k=k, visits=(), radius=radius, density_estimate=0.0)
    arr = np.array(sorted(visits), dtype=np.int64)
    prefix = PrefixSet(arr, int(arr[-1]))
    density = max(prefix_density(prefix, spec.gamma, end) for end in block_ends)
    return VisitReport(
        k=k, visits=tuple(int(v) for v in arr), radius=radius, density_estimate=density
    )
