"""Analytic marginal distributions with exact F, f, and F^{-1}.

Every generator in this package emits values whose marginal law is one of the
models below, so the true quantile xi_p = F^{-1}(p) and the density f(xi_p)
are available in closed form (or to machine precision for the mean-of-uniforms
law, whose inverse is computed by bisection). That exactness is what makes the
per-path remainder and envelope computations meaningful.

Model functions are module-level and bound with ``functools.partial`` so that
a ``MarginalModel`` pickles cleanly into worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy.special import ndtri

from .errors import SpecError

__all__ = [
    "Support",
    "MarginalModel",
    "uniform",
    "exponential",
    "normal",
    "bates",
    "marginal_from_config",
]


@dataclass(frozen=True)
class Support:
    """Closed support interval; lo/hi may be infinite."""

    lo: float
    hi: float

    def contains(self, x) -> bool:
        return bool(np.all((np.asarray(x) >= self.lo) & (np.asarray(x) <= self.hi)))

    def clip(self, lo: float, hi: float) -> tuple[float, float, bool]:
        """Intersect [lo, hi] with the support; the flag reports whether clipping occurred."""
        lo2, hi2 = max(lo, self.lo), min(hi, self.hi)
        return lo2, hi2, (lo2 != lo or hi2 != hi)


@dataclass(frozen=True)
class MarginalModel:
    """An analytic marginal: CDF, density, inverse CDF, and density metadata.

    ``pdf_derivative_bound`` is sup |f'| over the interior of the support
    (metadata surfaced for the representation's smoothness hypothesis; it is
    not verified symbolically). ``density_peaks`` lists interior points where
    the density may attain a local maximum; the window sup-density search
    seeds itself with these.
    """

    name: str
    cdf: Callable = field(compare=False)
    pdf: Callable = field(compare=False)
    inv_cdf: Callable = field(compare=False)
    pdf_derivative_bound: float = 0.0
    support: Support = Support(-math.inf, math.inf)
    density_peaks: tuple[float, ...] = ()
    params: tuple[tuple[str, float], ...] = ()

    def quantile(self, p: float) -> float:
        """True p-quantile xi_p = inf{x : F(x) >= p}, exact for these models."""
        if not 0.0 < p < 1.0:
            raise ValueError(f"p must lie in (0,1), got {p}")
        return float(self.inv_cdf(p))


# ---------------------------------------------------------------------------
# Uniform(low, high)
# ---------------------------------------------------------------------------

def _uniform_cdf(low, high, x):
    return np.clip((np.asarray(x, dtype=float) - low) / (high - low), 0.0, 1.0)


def _uniform_pdf(low, high, x):
    x = np.asarray(x, dtype=float)
    return np.where((x >= low) & (x <= high), 1.0 / (high - low), 0.0)


def _uniform_inv(low, high, t):
    return low + (high - low) * np.asarray(t, dtype=float)


def uniform(low: float = 0.0, high: float = 1.0) -> MarginalModel:
    if not high > low:
        raise ValueError("need high > low")
    return MarginalModel(
        name="uniform",
        cdf=partial(_uniform_cdf, low, high),
        pdf=partial(_uniform_pdf, low, high),
        inv_cdf=partial(_uniform_inv, low, high),
        pdf_derivative_bound=0.0,
        support=Support(low, high),
        params=(("low", low), ("high", high)),
    )


# ---------------------------------------------------------------------------
# Exponential(rate)
# ---------------------------------------------------------------------------

def _exp_cdf(rate, x):
    x = np.asarray(x, dtype=float)
    return np.where(x <= 0.0, 0.0, -np.expm1(-rate * np.maximum(x, 0.0)))


def _exp_pdf(rate, x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0.0, 0.0, rate * np.exp(-rate * np.maximum(x, 0.0)))


def _exp_inv(rate, t):
    return -np.log1p(-np.asarray(t, dtype=float)) / rate


def exponential(rate: float = 1.0) -> MarginalModel:
    if not rate > 0:
        raise ValueError("rate must be positive")
    return MarginalModel(
        name="exponential",
        cdf=partial(_exp_cdf, rate),
        pdf=partial(_exp_pdf, rate),
        inv_cdf=partial(_exp_inv, rate),
        pdf_derivative_bound=rate * rate,  # |f'(x)| = rate^2 e^{-rate x}, max at 0
        support=Support(0.0, math.inf),
        density_peaks=(0.0,),
        params=(("rate", rate),),
    )


# ---------------------------------------------------------------------------
# Normal(mean, std)
# ---------------------------------------------------------------------------

_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _norm_cdf(mean, std, x):
    from scipy.special import ndtr

    return ndtr((np.asarray(x, dtype=float) - mean) / std)


def _norm_pdf(mean, std, x):
    z = (np.asarray(x, dtype=float) - mean) / std
    return _INV_SQRT2PI * np.exp(-0.5 * z * z) / std


def _norm_inv(mean, std, t):
    return mean + std * ndtri(np.asarray(t, dtype=float))


def normal(mean: float = 0.0, std: float = 1.0) -> MarginalModel:
    if not std > 0:
        raise ValueError("std must be positive")
    # sup |f'| attained at mean +- std: phi(1)/std^2
    dbound = _INV_SQRT2PI * math.exp(-0.5) / (std * std)
    return MarginalModel(
        name="normal",
        cdf=partial(_norm_cdf, mean, std),
        pdf=partial(_norm_pdf, mean, std),
        inv_cdf=partial(_norm_inv, mean, std),
        pdf_derivative_bound=dbound,
        support=Support(-math.inf, math.inf),
        density_peaks=(mean,),
        params=(("mean", mean), ("std", std)),
    )


# ---------------------------------------------------------------------------
# Bates(k): mean of k i.i.d. uniforms on (0,1)
# ---------------------------------------------------------------------------
# The sum of k uniforms has the piecewise-polynomial (Irwin-Hall) law
#   F_k(y) = (1/k!) sum_{j=0}^{floor(y)} (-1)^j C(k,j) (y-j)^k,   y in [0, k],
#   f_k(y) = (1/(k-1)!) sum_{j=0}^{floor(y)} (-1)^j C(k,j) (y-j)^{k-1},
# and the mean-of-k law is the rescaling x = y/k. Conditioning is fine for
# the small k used here (k = m+1 with m <= ~16).


def _irwin_hall_terms(y, k, power, norm):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for j in range(k + 1):
        coef = ((-1.0) ** j) * math.comb(k, j) / norm
        w = y - j
        out += np.where(w > 0.0, coef * np.maximum(w, 0.0) ** power, 0.0)
    return out


def _bates_cdf(k, x):
    x = np.asarray(x, dtype=float)
    y = np.clip(x, 0.0, 1.0) * k
    val = _irwin_hall_terms(y, k, k, math.factorial(k))
    return np.clip(np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, val)), 0.0, 1.0)


def _bates_pdf(k, x):
    x = np.asarray(x, dtype=float)
    y = x * k
    val = k * _irwin_hall_terms(y, k, k - 1, math.factorial(k - 1))
    return np.where((x < 0.0) | (x > 1.0), 0.0, np.maximum(val, 0.0))


def _bates_inv(k, t):
    """Invert the mean-of-k-uniforms CDF by bisection on [0,1] to ~1e-18."""
    t = np.asarray(t, dtype=float)
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = _bates_cdf(k, mid) < t
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = 0.5 * (lo + hi)
    return out if out.ndim else float(out)


def _bates_pdf_derivative_bound(k: int) -> float:
    if k == 1:
        return 0.0
    # f'(x) = k^2 * IH'_k(kx); IH' is itself piecewise polynomial of degree k-2.
    xs = np.linspace(0.0, 1.0, 4001)
    deriv = k * k * _irwin_hall_terms(xs * k, k, k - 2, math.factorial(k - 2))
    return float(np.max(np.abs(deriv)))


def bates(k: int) -> MarginalModel:
    if not (isinstance(k, int) and k >= 1):
        raise ValueError("k must be a positive integer")
    knots = tuple(j / k for j in range(k + 1))
    return MarginalModel(
        name=f"bates{k}",
        cdf=partial(_bates_cdf, k),
        pdf=partial(_bates_pdf, k),
        inv_cdf=partial(_bates_inv, k),
        pdf_derivative_bound=_bates_pdf_derivative_bound(k),
        support=Support(0.0, 1.0),
        density_peaks=(0.5,) + knots,
        params=(("k", float(k)),),
    )


# ---------------------------------------------------------------------------
# Registry for config round-trips
# ---------------------------------------------------------------------------

_FACTORIES = {
    "uniform": uniform,
    "exponential": exponential,
    "normal": normal,
    "bates": bates,
}


def marginal_from_config(name: str, params: dict | None = None) -> MarginalModel:
    base = name.rstrip("0123456789")
    if base == "bates":
        k = int(name[len("bates"):]) if name != "bates" else int((params or {})["k"])
        return bates(k)
    if name not in _FACTORIES:
        raise SpecError(f"unknown marginal {name!r}; known: {sorted(_FACTORIES)}")
    kwargs = dict(params or {})
    return _FACTORIES[name](**kwargs)
