"""Uniform-mixing coefficient profiles and the constants derived from them.

A profile packages the lag-indexed dependence coefficients

    phi(n) = sup |P(B | A) - P(B)|,   A in the past, B in the future n apart,

together with how the sequence behaves beyond the lags we evaluate explicitly
(identically zero, geometric decay, or a polynomial majorant). Everything the
envelope formulas need reduces to the square-root series

    half_series_sum = sum_{n>=1} phi(n)^{1/2},
    c3 = 4 * (1 + 4 * half_series_sum),

so the profile precomputes both at construction.

For a stationary finite-state chain with uniform stationary law, the sup over
future events collapses to a per-row total-variation distance at lag n, which
``phi_markov`` evaluates exactly from matrix powers:

    phi(n) = max_i sum_j max(P^n(i, j) - 1/K, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Union

import numpy as np

from .errors import DomainError, SpecError

__all__ = [
    "FiniteTail",
    "GeometricTail",
    "PolynomialTail",
    "MixingProfile",
    "make_profile",
    "zero_profile",
    "uniform_bound_profile",
    "geometric_profile",
    "phi_markov",
    "half_series",
    "as_upper_bound",
]


# ---------------------------------------------------------------------------
# Tail descriptors: how phi behaves beyond the explicitly-evaluated lags
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteTail:
    """phi(n) = 0 for every n > last_lag."""

    last_lag: int


@dataclass(frozen=True)
class GeometricTail:
    """phi(n) <= coeff * ratio**(n - start) for n >= start, with 0 <= ratio < 1."""

    coeff: float
    ratio: float
    start: int


@dataclass(frozen=True)
class PolynomialTail:
    """phi(n) <= coeff * n**(-order)."""

    coeff: float
    order: float


TailBound = Union[FiniteTail, GeometricTail, PolynomialTail]


@dataclass(frozen=True)
class MixingProfile:
    """Mixing coefficients plus the derived series constants.

    ``kind`` is "exact" when phi returns the true coefficients and
    "upper_bound" when it returns a valid majorant (e.g. the emitted values
    of a copula chain, whose sigma-fields are coarser than the latent
    chain's, or short moving-average lags bounded by the universal phi <= 1).
    """

    phi: Callable[[int], float] = field(compare=False)
    kind: str
    tail: TailBound
    half_series_sum: float
    c3: float
    polynomial_order_witness: float | None = None


def make_profile(phi, kind, tail, polynomial_order_witness=None, tol=1e-12) -> MixingProfile:
    hss = _half_series(phi, tail, tol)
    return MixingProfile(
        phi=phi,
        kind=kind,
        tail=tail,
        half_series_sum=hss,
        c3=4.0 * (1.0 + 4.0 * hss),
        polynomial_order_witness=polynomial_order_witness,
    )


def as_upper_bound(profile: MixingProfile) -> MixingProfile:
    """Same numbers, declared as a majorant (used for emitted-values sequences)."""
    return replace(profile, kind="upper_bound")


# ---------------------------------------------------------------------------
# Shipped profiles
# ---------------------------------------------------------------------------

def _zero_phi(n: int) -> float:
    if n < 1:
        raise ValueError("lag must be >= 1")
    return 0.0


def _step_phi(last: int, n: int) -> float:
    if n < 1:
        raise ValueError("lag must be >= 1")
    return 1.0 if n <= last else 0.0


def _table_phi(table: tuple, tail: GeometricTail, n: int) -> float:
    if n < 1:
        raise ValueError("lag must be >= 1")
    if n <= len(table):
        return table[n - 1]
    return tail.coeff * tail.ratio ** (n - tail.start)


def zero_profile() -> MixingProfile:
    """Independence: phi identically zero, c3 = 4 exactly."""
    return make_profile(_zero_phi, kind="exact", tail=FiniteTail(0))


def uniform_bound_profile(m: int) -> MixingProfile:
    """Block-independent sequences: phi = 1 up to lag m (universal bound),
    exactly 0 beyond, giving c3 = 4 * (1 + 4m)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return make_profile(partial(_step_phi, m), kind="upper_bound", tail=FiniteTail(m))


def geometric_profile(coeff: float, ratio: float, kind: str = "exact") -> MixingProfile:
    """phi(n) = coeff * ratio**n (clamped to [0,1])."""
    if not 0.0 <= ratio < 1.0:
        raise DomainError("ratio must lie in [0,1)")
    phi = partial(_table_phi, (), GeometricTail(coeff, ratio, 0))
    return make_profile(phi, kind=kind, tail=GeometricTail(coeff, ratio, 0))


# ---------------------------------------------------------------------------
# Exact chain coefficients via matrix powers
# ---------------------------------------------------------------------------

def _row_tv_from_uniform(row: np.ndarray) -> float:
    """Total-variation distance of a probability row from the uniform law.

    The maximizing event is {j : row_j > 1/K} (or its complement); both sides
    are evaluated because the rounded differences need not sum to exactly
    zero, and the sup over events is whichever is larger in floats."""
    k = row.size
    diffs = [v - 1.0 / k for v in row]
    pos = math.fsum(d for d in diffs if d > 0.0)
    neg = -math.fsum(d for d in diffs if d < 0.0)
    return max(pos, neg)


def phi_markov(transition, max_lag: int = 512, fit_floor: float = 1e-6) -> MixingProfile:
    """Exact mixing coefficients of a uniform-stationary finite chain.

    phi(n) is evaluated lag by lag from matrix powers down to coefficients of
    ~1e-13 (so brute-force oracles on the same powers see identical values),
    with a geometric extension beyond. The decay ratio is fitted from the
    last lags with phi >= ``fit_floor``: below it, the 1/K-plus-tiny entries
    of P^n lose the relative precision a ratio fit (and the square-root
    series) needs, so the series tail also anchors there. The returned
    profile is exact for the latent chain; callers modelling a function of
    the chain should re-flag it with :func:`as_upper_bound`.
    """
    P = np.asarray(transition, dtype=float)
    _check_uniform_stationary(P)
    k = P.shape[0]
    raw_floor = 1e-13

    table: list[float] = []
    Pn = np.eye(k)
    for _ in range(max_lag):
        Pn = Pn @ P
        table.append(max(_row_tv_from_uniform(Pn[i]) for i in range(k)))
        if table[-1] < raw_floor:
            break

    while table and table[-1] < raw_floor:
        table.pop()  # entries absorbed into 1/K carry no usable information
    if not table:
        # rows of P already uniform: the chain is i.i.d., phi vanishes at every lag
        phi = partial(_table_phi, (0.0,), GeometricTail(0.0, 0.0, 2))
        return make_profile(phi, kind="exact", tail=FiniteTail(0))

    # anchor the fit (and the series tail) at the last well-conditioned lag
    b = max((i + 1 for i, v in enumerate(table) if v >= fit_floor), default=len(table))
    if b < 2:
        b = len(table)
    if b < 2:
        raise DomainError(
            "coefficients fell below the fit threshold at lag 1; treat the chain as independent"
        )
    a = max(1, b - 8)
    if table[b - 1] <= 0.0 or table[b - 1] >= table[a - 1]:
        raise DomainError(
            f"no geometric decay detected by lag {b}; increase max_lag or check the chain"
        )
    ratio = (table[b - 1] / table[a - 1]) ** (1.0 / (b - a))
    if not 0.0 < ratio < 1.0 - 1e-12:
        raise DomainError(
            f"fitted decay ratio {ratio:.6g} is not usable; increase max_lag or check the chain"
        )

    tail = GeometricTail(table[b - 1], ratio, b)
    phi = partial(_table_phi, tuple(table), tail)
    return make_profile(phi, kind="exact", tail=tail)


def _check_uniform_stationary(P: np.ndarray) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise SpecError(f"transition matrix must be square with K >= 2, got shape {P.shape}")
    if np.any(P < -1e-15):
        raise SpecError("transition matrix has negative entries")
    rows = P.sum(axis=1)
    if np.max(np.abs(rows - 1.0)) > 1e-12:
        raise SpecError(f"rows must sum to 1 within 1e-12, got sums {rows}")
    cols = P.sum(axis=0)
    if np.max(np.abs(cols - 1.0)) > 1e-10:
        raise SpecError(
            "the uniform law must be stationary (columns must each sum to 1); "
            f"column sums {cols}"
        )
    # Wielandt bound: a primitive K x K chain has a strictly positive power
    # by exponent (K-1)^2 + 1.
    k = P.shape[0]
    power = np.linalg.matrix_power(P, (k - 1) ** 2 + 1)
    if np.any(power <= 0.0):
        raise SpecError("chain is not irreducible and aperiodic (a high matrix power has zeros)")


# ---------------------------------------------------------------------------
# The square-root series sum with certified truncation error
# ---------------------------------------------------------------------------

def half_series(profile: MixingProfile, tol: float = 1e-12) -> float:
    """sum_{n>=1} phi(n)^{1/2} with absolute truncation error below tol.

    The explicitly-summed prefix is extended until the closed-form bound on
    the remaining square-root tail drops below tol; that bound is then added,
    so the result errs on the conservative side by less than tol.
    """
    return _half_series(profile.phi, profile.tail, tol)


def _half_series(phi, tail, tol: float) -> float:
    if isinstance(tail, FiniteTail):
        return math.fsum(math.sqrt(phi(i)) for i in range(1, tail.last_lag + 1))

    if isinstance(tail, GeometricTail):
        if tail.coeff == 0.0:
            return math.fsum(math.sqrt(phi(i)) for i in range(1, tail.start))
        # lags before the anchor use phi itself; from the anchor onwards the
        # geometric form is used (for table-backed profiles the raw values
        # below the anchor are too noisy for square roots)
        rh = math.sqrt(tail.ratio)
        n = max(tail.start, 1)
        total = math.fsum(math.sqrt(phi(i)) for i in range(1, n))
        sq_coeff = math.sqrt(tail.coeff)
        while True:
            tail_bound = sq_coeff * rh ** (n - tail.start) / (1.0 - rh)
            if tail_bound < tol:
                return total + tail_bound
            total += sq_coeff * rh ** (n - tail.start)
            n += 1
            if n > 10_000_000:
                raise DomainError("geometric tail failed to fall below tol")

    if isinstance(tail, PolynomialTail):
        q = tail.order / 2.0
        if q <= 1.0:
            raise DomainError(
                f"sqrt-series diverges: need polynomial order > 2, got {tail.order}"
            )
        n = 1
        total = 0.0
        while True:
            # integral bound: sum_{i>n} i^-q <= n^(1-q)/(q-1)
            tail_bound = math.sqrt(tail.coeff) * n ** (1.0 - q) / (q - 1.0)
            if tail_bound < tol:
                return total + tail_bound
            total += math.sqrt(phi(n))
            n += 1
            if n > 10_000_000:
                raise DomainError("polynomial tail failed to fall below tol")

    raise DomainError(f"cannot certify summability for tail {tail!r}")
