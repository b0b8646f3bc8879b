"""Truncated Taylor series and the weighted coefficient shift.

A series is a dense, immutable vector of complex coefficients; index j
holds the z^j coefficient.  The shift acts by

    (T f)_j = a_{j+1} * (1 + 1/(j+1))**alpha,

and its n-th power collapses the weight product by telescoping to
((j+n+1)/(j+1))**alpha, which is what `apply_shift_power` evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from tsl.errors import DomainError


@dataclass(frozen=True)
class ShiftParams:
    """Exponent of the shift weights (1 + 1/n)**alpha."""

    alpha: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.alpha):
            raise DomainError("alpha must be finite")


@dataclass(frozen=True, eq=False)
class CoefficientSeries:
    """Finite Taylor series at 0; length is always max_degree + 1.

    Trailing zeros are kept, never trimmed, so the carried degree is part
    of the value.  Coefficients must be finite.
    """

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.coefficients, dtype=np.complex128)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("coefficients must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise DomainError("coefficients must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "coefficients", arr)

    @property
    def max_degree(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def zero(cls, max_degree: int = 0) -> "CoefficientSeries":
        return cls(np.zeros(max_degree + 1, dtype=np.complex128))

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "max_degree": self.max_degree,
            "coefficients": [[float(c.real), float(c.imag)] for c in self.coefficients],
        }

    @classmethod
    def from_json_obj(cls, obj: dict[str, Any]) -> "CoefficientSeries":
        coeffs = np.array([complex(re, im) for re, im in obj["coefficients"]])
        out = cls(coeffs)
        if out.max_degree != int(obj["max_degree"]):
            raise DomainError("max_degree does not match coefficient count")
        return out


def weight(n: int, alpha: float) -> float:
    """Shift weight (1 + 1/n)**alpha; defined for n >= 1."""
    if n < 1:
        raise DomainError("weight index must be >= 1")
    return (1.0 + 1.0 / n) ** alpha


def apply_shift(series: CoefficientSeries, params: ShiftParams) -> CoefficientSeries:
    """One application of the weighted shift; constants map to the zero series."""
    a = series.coefficients
    if len(a) == 1:
        return CoefficientSeries.zero(0)
    j = np.arange(len(a) - 1, dtype=np.float64)
    w = ((j + 2.0) / (j + 1.0)) ** params.alpha
    return CoefficientSeries(a[1:] * w)


def apply_shift_power(
    series: CoefficientSeries, n: int, params: ShiftParams
) -> CoefficientSeries:
    """n-th shift power via the telescoped weight ((j+n+1)/(j+1))**alpha.

    The closed form avoids accumulating n rounding errors; n = 0 returns
    the input unchanged.
    """
    if n < 0:
        raise DomainError("shift power must be >= 0")
    if n == 0:
        return series
    a = series.coefficients
    if n >= len(a):
        return CoefficientSeries.zero(0)
    j = np.arange(len(a) - n, dtype=np.float64)
    w = ((j + n + 1.0) / (j + 1.0)) ** params.alpha
    return CoefficientSeries(a[n:] * w)


def evaluate(series: CoefficientSeries, z: complex) -> complex:
    """Value of the series at z (Horner for short series, power dot above)."""
    a = series.coefficients
    if len(a) <= 64:
        acc = 0.0 + 0.0j
        for c in a[::-1]:
            acc = acc * z + c
        return complex(acc)
    if z == 0:
        return complex(a[0])
    powers = np.power(z, np.arange(len(a)))
    return complex(np.dot(a, powers))
