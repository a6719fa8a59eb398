"""Empirical distribution function and the generalized-inverse sample quantile.

The empirical CDF is the right-continuous step function
F_n(x) = #{i : X_i <= x} / n, and the sample p-quantile is its generalized
inverse inf{x : F_n(x) >= p}, which equals the order statistic of rank
ceil(n*p). No interpolation: the inf definition is used verbatim (ties are
allowed and simply produce larger jumps).

Arithmetic convention: "F_n(x) >= p" means the IEEE comparison of the float
k/n against the float p, the same comparison every evaluation of the ECDF
uses. The rank is the smallest k passing it, found by adjusting ceil(n*p)
by at most a step, so e.g. p = 0.1, n = 10 yields rank 1 even though the
double nearest 0.1 exceeds 1/10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError

__all__ = [
    "EmpiricalCdf",
    "QuantileEstimate",
    "StepCdf",
    "build_ecdf",
    "quantile_index",
    "sample_quantile",
    "generalized_inverse",
]


@dataclass(frozen=True)
class EmpiricalCdf:
    """Sorted sample with O(log n) evaluation of F_n and its left limit."""

    sorted_values: np.ndarray = field(compare=False)
    n: int

    def evaluate(self, x):
        """F_n(x) = #{values <= x} / n (right-continuous value)."""
        return np.searchsorted(self.sorted_values, x, side="right") / self.n

    def left_limit(self, x):
        """F_n(x-) = #{values < x} / n."""
        return np.searchsorted(self.sorted_values, x, side="left") / self.n

    def count_le(self, x) -> int:
        return int(np.searchsorted(self.sorted_values, x, side="right"))

    def step_cdf(self) -> "StepCdf":
        xs, counts = np.unique(self.sorted_values, return_counts=True)
        return StepCdf(xs=xs, ps=np.cumsum(counts) / self.n)


def build_ecdf(data) -> EmpiricalCdf:
    """Build from a SamplePath or any 1-d array of values."""
    values = np.asarray(getattr(data, "values", data), dtype=float)
    if values.size == 0:
        raise ValueError("cannot build an empirical CDF from an empty sample")
    if np.any(np.isnan(values)):
        raise DataError("sample contains NaN values")
    return EmpiricalCdf(sorted_values=np.sort(values), n=values.size)


@dataclass(frozen=True)
class QuantileEstimate:
    p: float
    value: float
    n: int
    order_index: int  # 1-based rank, = ceil(n*p)


def quantile_index(n: int, p: float) -> int:
    """Smallest k with k/n >= p (IEEE comparison), i.e. ceil(n*p) up to a
    one-step float correction."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    k = min(max(math.ceil(n * p), 1), n)
    while k > 1 and (k - 1) / n >= p:
        k -= 1
    while k / n < p:
        k += 1
    return k


def sample_quantile(cdf: EmpiricalCdf, p: float) -> QuantileEstimate:
    """inf{x : F_n(x) >= p}: the order statistic of rank ceil(n*p)."""
    k = quantile_index(cdf.n, p)
    return QuantileEstimate(p=p, value=float(cdf.sorted_values[k - 1]), n=cdf.n, order_index=k)


# ---------------------------------------------------------------------------
# Generalized inverse of an arbitrary step CDF
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step function given by breakpoints: F(x) = ps[j] for
    xs[j] <= x < xs[j+1], and 0 left of xs[0]. ps must be nondecreasing; the
    last value may be < 1 (sub-probability functions are allowed so that
    unattainable levels can be exercised)."""

    xs: np.ndarray = field(compare=False)
    ps: np.ndarray = field(compare=False)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ps = np.asarray(self.ps, dtype=float)
        if xs.ndim != 1 or xs.shape != ps.shape or xs.size == 0:
            raise ValueError("xs and ps must be equal-length nonempty 1-d arrays")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(np.diff(ps) < 0) or ps[0] < 0 or ps[-1] > 1 + 1e-12:
            raise ValueError("ps must be nondecreasing within [0, 1]")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ps", ps)

    def evaluate(self, x):
        idx = np.searchsorted(self.xs, x, side="right")
        res = np.where(idx > 0, self.ps[np.maximum(idx - 1, 0)], 0.0)
        return float(res) if np.isscalar(x) else res


def generalized_inverse(F: StepCdf, t: float) -> float:
    """inf{x : F(x) >= t} for 0 < t <= 1.

    The returned map is nondecreasing and left-continuous in t. Raises
    DomainError when F never attains level t.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    j = int(np.searchsorted(F.ps, t, side="left"))
    if j >= F.ps.size:
        raise DomainError(f"level {t} is never attained (max F = {F.ps[-1]})")
    return float(F.xs[j])
