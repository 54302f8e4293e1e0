"""Log-log least squares for query-count exponents, with closed-form targets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    predicted: float | None = None

    @property
    def abs_delta(self) -> float | None:
        return None if self.predicted is None else abs(self.slope - self.predicted)


def fit_power_law(xs: Sequence[float], ys: Sequence[float], predicted: float | None = None) -> FitResult:
    """Fit ``log y = slope * log x + intercept``; needs three or more distinct ``x``."""
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    if len(set(np.round(x, 12))) < 3:
        raise DegenerateFit("need at least three distinct sizes")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise DegenerateFit("query counts do not vary with size")
    r2 = 1.0 - float((resid**2).sum()) / ss_tot
    return FitResult(float(slope), float(intercept), min(1.0, max(0.0, r2)), predicted)


def const_exponent(d: int, k: int) -> float:
    """Exponent of the k-round local search bound in dimension d."""
    if d == 1:
        return 1 / k
    return (d ** (k + 1) - d**k) / (d**k - 1)


def poly_exponent(d: int, alpha: float) -> float:
    return (d - 1) - (d - 2) * alpha / d


def one_d_exponent(k: int) -> float:
    return 1 / k


def theory_exponent(theory: str, d: int = 1, k: int | None = None, alpha: float | None = None) -> float:
    if theory in ("const_ls", "const_brouwer"):
        return const_exponent(d, int(k))
    if theory == "poly_ls":
        return poly_exponent(d, float(alpha))
    if theory == "one_d":
        return one_d_exponent(int(k))
    raise ValueError(f"unknown theory {theory!r}")


def perfect_power_sizes(d: int, k: int, bases: Sequence[int]) -> list[int]:
    """Sizes ``b^(d^k - 1)`` for which every block side of the schedule is an integer."""
    e = d**k - 1 if d > 1 else k
    return [int(b) ** e for b in bases]


