"""Radial integral means, circle norms, and growth-exponent fits.

For p = 2 the mean comes straight from the coefficients (Parseval); for
other finite p the circle is sampled by an FFT of the dilated
coefficient vector with at least 4*(degree+1) samples, and p = infinity
is a sampled sup with an 8x floor (a documented lower estimate).

`dyadic_mean2` evaluates the L^2 mean of a *planned* block construction
at radii 1 - 2**-j without materializing coefficients, so schedules
whose blocks live at astronomically large degrees remain measurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from io import StringIO

import mpmath as mp
import numpy as np

from tsl._util import fmt17, map_ordered
from tsl.constructor import BlockLedger, Regime
from tsl.errors import DomainError
from tsl.polybank import TargetEnumeration, index_weighted
from tsl.series import CoefficientSeries

_LN2 = math.log(2.0)
_EXP_FLOOR = 760.0  # exp(-x) is a hard zero in doubles well before this


def conjugate_exponent(p: float) -> float:
    """q with 1/p + 1/q = 1; q = infinity when p = 1."""
    if p == 1.0:
        return math.inf
    if p == math.inf:
        return 1.0
    if p < 1.0:
        raise DomainError("p must be >= 1")
    return p / (p - 1.0)


def critical_exponent(p: float, gamma: float) -> float:
    """(1 - gamma) / max(2, q); zero at p = 1 where q is infinite."""
    if not (0.0 <= gamma <= 1.0):
        raise DomainError("gamma must lie in [0, 1]")
    q = conjugate_exponent(p)
    if q == math.inf:
        return 0.0
    return (1.0 - gamma) / max(2.0, q)


@dataclass(frozen=True)
class MeanRow:
    p: float
    r: float
    value: float
    quadrature_size: int  # 0 marks the coefficient-side route


@dataclass(frozen=True)
class RadialMeansTable:
    rows: tuple[MeanRow, ...]

    def __post_init__(self) -> None:
        key = lambda row: (row.p == math.inf, row.p, row.r)
        if list(self.rows) != sorted(self.rows, key=key):
            raise DomainError("rows must be sorted by (p, r)")
        for row in self.rows:
            if not (math.isfinite(row.value) and row.value >= 0.0):
                raise DomainError("mean values must be finite and nonnegative")

    def at_p(self, p: float) -> tuple[MeanRow, ...]:
        return tuple(row for row in self.rows if row.p == p)

    def to_csv(self) -> str:
        out = StringIO()
        out.write("p,r,value,quadrature_size\n")
        for row in self.rows:
            p_txt = "inf" if row.p == math.inf else fmt17(row.p)
            out.write(f"{p_txt},{fmt17(row.r)},{fmt17(row.value)},{row.quadrature_size}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RadialMeansTable":
        lines = [ln for ln in text.strip().splitlines() if ln]
        rows = []
        for ln in lines[1:]:
            p_txt, r_txt, v_txt, q_txt = ln.split(",")
            rows.append(
                MeanRow(
                    p=math.inf if p_txt == "inf" else float(p_txt),
                    r=float(r_txt),
                    value=float(v_txt),
                    quadrature_size=int(q_txt),
                )
            )
        return cls(tuple(rows))


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual_rms: float
    r_window: tuple[float, float]

    def __post_init__(self) -> None:
        if self.residual_rms < 0:
            raise DomainError("residual must be nonnegative")


def _oversampling_floor(max_degree: int, p: float) -> int:
    factor = 8 if p == math.inf else 4
    return factor * (max_degree + 1)


def _circle_samples(coeffs: np.ndarray, size: int) -> np.ndarray:
    """|values| of the polynomial at `size` equispaced points of the unit circle."""
    return np.abs(np.fft.ifft(coeffs, n=size)) * size


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _mean_from_samples(samples: np.ndarray, p: float) -> float:
    if p == math.inf:
        return float(samples.max())
    return float(np.mean(samples**p) ** (1.0 / p))


def _check_p(p: float) -> None:
    if p != math.inf and (not math.isfinite(p) or p < 1.0):
        raise DomainError("p must lie in [1, infinity]")


def mean_p(
    series: CoefficientSeries,
    p: float,
    r: float,
    quadrature_size: int | None = None,
) -> float:
    """Radial L^p mean of the series on the circle of radius r in (0, 1)."""
    _check_p(p)
    if not (0.0 < r < 1.0):
        raise DomainError("radius must lie in (0, 1)")
    a = series.coefficients
    j = np.arange(len(a), dtype=np.float64)
    dilated = a * np.exp(j * math.log(r))
    if p == 2.0:
        return math.sqrt(float(np.sum(np.abs(dilated) ** 2)))
    size = _resolve_quadrature(series.max_degree, p, quadrature_size)
    return _mean_from_samples(_circle_samples(dilated, size), p)


def circle_norm(
    series: CoefficientSeries, p: float, quadrature_size: int | None = None
) -> float:
    """L^p norm on the unit circle itself (the r = 1 limit of mean_p)."""
    _check_p(p)
    a = series.coefficients
    if p == 2.0:
        return math.sqrt(float(np.sum(np.abs(a) ** 2)))
    size = _resolve_quadrature(series.max_degree, p, quadrature_size)
    return _mean_from_samples(_circle_samples(a, size), p)


def _resolve_quadrature(max_degree: int, p: float, requested: int | None) -> int:
    floor = _oversampling_floor(max_degree, p)
    if requested is None:
        return _next_pow2(floor)
    if requested < floor:
        raise DomainError(
            f"quadrature_size {requested} below the oversampling floor; need >= {floor}"
        )
    return requested


def means_table(
    series: CoefficientSeries,
    p_list: list[float],
    r_grid: list[float],
    quadrature_size: int | None = None,
) -> RadialMeansTable:
    """One row per (p, r), computed independently, assembled in sorted order."""
    if not p_list or not r_grid:
        raise DomainError("p_list and r_grid must be nonempty")
    pairs = sorted(
        ((p, r) for p in set(p_list) for r in set(r_grid)),
        key=lambda t: (t[0] == math.inf, t[0], t[1]),
    )
    def one(pair: tuple[float, float]) -> MeanRow:
        p, r = pair
        value = mean_p(series, p, r, quadrature_size)
        size = 0 if p == 2.0 else _resolve_quadrature(series.max_degree, p, quadrature_size)
        return MeanRow(p=p, r=r, value=value, quadrature_size=size)
    return RadialMeansTable(tuple(map_ordered(one, pairs)))


def dyadic_radii(max_degree: int) -> list[float]:
    """Default radius grid 1 - 2**-j, j = 1 .. floor(log2(max_degree)) - 1."""
    top = max(1, int(math.floor(math.log2(max_degree))) - 1)
    return [1.0 - 2.0**-j for j in range(1, top + 1)]


def fit_growth_exponent(table: RadialMeansTable, p: float) -> GrowthFit:
    """Least-squares slope of log(mean) against log(1/(1-r)).

    Only the upper half of the available radii enters the fit; the low
    radii are dominated by blocks the gates removed.  Rows with zero
    value cannot be log-fitted and are dropped first.
    """
    rows = sorted(table.at_p(p), key=lambda row: row.r)
    rows = [row for row in rows if row.value > 0.0]
    distinct = sorted({row.r for row in rows})
    if len(distinct) < 4:
        raise DomainError("growth fit needs at least 4 rows with distinct r and positive value")
    upper = rows[len(rows) // 2 :]
    x = np.array([math.log(1.0 / (1.0 - row.r)) for row in upper])
    y = np.array([math.log(row.value) for row in upper])
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    return GrowthFit(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        r_window=(upper[0].r, upper[-1].r),
    )


def _ln_eps(j_exp: int) -> float:
    """ln(-ln r) for r = 1 - 2**-j, exact in the deep-j regime."""
    if j_exp < 1:
        raise DomainError("dyadic exponent must be >= 1")
    if j_exp <= 500:
        return math.log(-math.log1p(-(2.0**-j_exp)))
    return -j_exp * _LN2


def dyadic_mean2(
    ledger: BlockLedger,
    targets: TargetEnumeration,
    alpha: float,
    j_exp: int,
    regime: Regime = Regime.RS,
    exact_cap: int = 1 << 16,
) -> float:
    """L^2 mean at r = 1 - 2**-j of a planned sign-family construction.

    Works from the ledger alone: the squared coefficient magnitudes of a
    sign-family block do not depend on the signs, so

        M_2^2 = sum over blocks, target coefficients j0, positions m of
                |b_j0|^2 (j0+1)^(2a) (lo + gate*m + j0 + 1)^(-2a)
                * r^(2 (lo + gate*m + j0)).

    Position sums run exactly while they fit below `exact_cap` terms;
    past that the sum is replaced by its midpoint integral, evaluated as
    an incomplete-gamma difference in high precision.  The crossover
    error is far below each radius step's increment, so monotonicity in
    j survives the approximation.
    """
    if regime is not Regime.RS:
        raise DomainError("structured means are defined for the sign-family regime only")
    ln_eps = _ln_eps(j_exp)
    ln_cap = math.log(exact_cap)
    total = 0.0
    for rec in ledger.built():
        assert rec.gate is not None and rec.budget is not None and rec.k is not None
        e = rec.lo.bit_length() - 1
        ln_sw = _LN2 + ln_eps + e * _LN2  # ln(2 * eps * lo)
        if ln_sw > math.log(_EXP_FLOOR):
            continue
        entry = targets.entry(rec.k)
        weighted = index_weighted(entry.series, alpha).coefficients
        gate, budget = rec.gate, rec.budget
        ln_delta = _LN2 + ln_eps + math.log(gate)
        ln_budget = math.log(budget)
        ln_mcut = math.log(_EXP_FLOOR) - ln_delta
        sw = math.exp(ln_sw)
        for j0 in range(entry.degree + 1):
            wsq = abs(weighted[j0]) ** 2
            if wsq == 0.0:
                continue
            if min(ln_budget, ln_mcut) <= ln_cap:
                m_count = budget if ln_mcut >= ln_budget else min(
                    budget, int(math.exp(ln_mcut)) + 2
                )
                total += wsq * _exact_position_sum(
                    e, gate, j0, m_count, alpha, sw, ln_eps
                )
            else:
                total += wsq * _integral_position_sum(
                    rec.lo, gate, j0, budget, alpha, ln_eps
                )
    return math.sqrt(total)


def _exact_position_sum(
    e: int, gate: int, j0: int, m_count: int, alpha: float, sw: float, ln_eps: float
) -> float:
    m = np.arange(m_count, dtype=np.float64)
    ln_lo = e * _LN2
    if e < 900:
        lnv = ln_lo + np.log1p((gate * m + j0 + 1.0) / float(1 << e))
    else:
        lnv = np.full(m_count, ln_lo)
    two_eps = math.exp(_LN2 + ln_eps)
    expo = -2.0 * alpha * lnv - sw - two_eps * (gate * m + j0)
    return float(np.exp(expo).sum())


def _integral_position_sum(
    lo: int, gate: int, j0: int, budget: int, alpha: float, ln_eps: float
) -> float:
    """Midpoint integral of the position sum as an incomplete-gamma difference."""
    with mp.workdps(40):
        eps = mp.e ** mp.mpf(ln_eps)
        lam = 2 * eps
        v_base = mp.mpf(lo) + j0 + 1
        v_lo = v_base - mp.mpf(gate) / 2
        v_hi = v_base + mp.mpf(gate) * (mp.mpf(budget) - mp.mpf(1) / 2)
        z = mp.mpf(1) - 2 * alpha
        g = mp.gammainc(z, a=lam * v_lo, b=mp.inf)
        if lam * v_hi < 1e6:
            g -= mp.gammainc(z, a=lam * v_hi, b=mp.inf)
        value = mp.e ** (2 * eps) / gate * lam ** (2 * alpha - 1) * g
        return max(0.0, float(value))


def dyadic_mean2_profile(
    ledger: BlockLedger,
    targets: TargetEnumeration,
    alpha: float,
    j_list: list[int],
    regime: Regime = Regime.RS,
    exact_cap: int = 1 << 16,
) -> list[tuple[int, float]]:
    """(j, M_2 at 1 - 2**-j) rows over a dyadic exponent grid."""
    vals = map_ordered(
        lambda j: dyadic_mean2(ledger, targets, alpha, j, regime, exact_cap), list(j_list)
    )
    return list(zip(j_list, vals))
