"""Per-path quantile-representation diagnostics with exact suprema.

For a path with empirical CDF F_n, true marginal F with density f, and target
level p (xi_p = F^{-1}(p), xi_pn = F_n^{-1}(p)), this module computes

  * the representation remainder
        R_n = xi_pn - xi_p + (F_n(xi_p) - p) / f(xi_p),
  * the centered local oscillation over a window W around xi_p
        H = sup_{x in W} |(F_n(x) - F(x)) - (F_n(xi_p) - p)|,
    and the uncentered variant sup_{x in W} |F_n(x) - F(x)|,
  * the shrinking windows and almost-sure envelope values those statistics
    are compared against.

Window half-widths (natural logs throughout; c3 is the mixing-series
constant 4(1 + 4*sum phi^(1/2)), and c0/theta/delta are free positive
constants exposed as parameters):

  narrow        a_n   = c0 * n^(-1/2) (log n)^(3/4)
  wide          tau_n = sqrt(16 c3 + theta) (log n)^(3/2) / (n^(1/2) (log log n)^(1/2))
  quantile_dev  eps_n = (2 sqrt(c3) + delta) (log n)^(1/2) / (f(xi_p) n^(1/2))

Envelope values, with d = sup of f over the window:

  oscillation_narrow  (d + 4 c3) n^(-3/4) log n
  oscillation_wide    (1 + d) ((16 c3 + theta) log n / n)^(1/2)
  sup_dev_wide        the same over sqrt(4), i.e. exactly half
  iid_modulus         n^(-3/4) (log n)^(3/4)   (unscaled, for rate fitting)

Suprema are exact, not gridded: F_n is a right-continuous step function and F
is continuous and nondecreasing, so x -> F_n(x) - F(x) decreases between
sample points and the supremum of the absolute value over [L, U] is attained
among {L, U} and the one-sided values at sample points inside the window.
The computation enumerates exactly those candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .empirical import EmpiricalCdf, build_ecdf, sample_quantile
from .errors import DomainError, TiesError
from .marginals import MarginalModel

__all__ = [
    "WINDOW_KINDS",
    "ENVELOPE_KINDS",
    "WindowSpec",
    "window",
    "window_interval",
    "sup_density",
    "remainder",
    "oscillation_sup",
    "sup_abs_deviation",
    "envelope",
    "SandwichCheck",
    "quantile_sandwich_check",
    "DeviationCheck",
    "quantile_deviation_check",
    "BahadurDiagnostics",
    "diagnostics",
    "diagnostics_to_csv",
]

WINDOW_KINDS = ("narrow", "wide", "quantile_dev")
ENVELOPE_KINDS = ("oscillation_narrow", "oscillation_wide", "sup_dev_wide", "iid_modulus")


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowSpec:
    kind: str
    half_width: float
    center: float
    constants: dict

    def bounds(self) -> tuple[float, float]:
        return self.center - self.half_width, self.center + self.half_width


def window(
    kind: str,
    n: int,
    *,
    marginal: MarginalModel,
    p: float,
    c0: float = 1.0,
    theta: float = 1.0,
    delta: float = 0.1,
    c3: float | None = None,
) -> WindowSpec:
    """Shrinking window of the given kind centered at the true quantile."""
    if kind not in WINDOW_KINDS:
        raise ValueError(f"kind must be one of {WINDOW_KINDS}, got {kind!r}")
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    center = marginal.quantile(p)
    logn = math.log(n)
    if kind == "narrow":
        half = c0 * logn ** 0.75 / math.sqrt(n)
        constants = {"c0": c0}
    elif kind == "wide":
        if n < 16:
            raise ValueError("wide windows need n >= 16 (log log n must be safely positive)")
        if c3 is None:
            raise ValueError("wide windows need the mixing constant c3")
        half = math.sqrt(16.0 * c3 + theta) * logn ** 1.5 / (math.sqrt(n) * math.sqrt(math.log(logn)))
        constants = {"theta": theta, "c3": c3}
    else:  # quantile_dev
        if c3 is None:
            raise ValueError("quantile_dev windows need the mixing constant c3")
        fp = float(marginal.pdf(center))
        if fp <= 0.0:
            raise DomainError(f"density vanishes at the {p}-quantile")
        half = (2.0 * math.sqrt(c3) + delta) * math.sqrt(logn) / (fp * math.sqrt(n))
        constants = {"delta": delta, "c3": c3, "f_at_quantile": fp}
    return WindowSpec(kind=kind, half_width=half, center=center, constants=constants)


def window_interval(win: WindowSpec, marginal: MarginalModel) -> tuple[float, float, bool]:
    """Window bounds intersected with the marginal support; flags clipping."""
    lo, hi = win.bounds()
    return marginal.support.clip(lo, hi)


def sup_density(marginal: MarginalModel, lo: float, hi: float) -> float:
    """sup of the density over [lo, hi] for the shipped unimodal-near-center
    marginals: endpoint/peak candidates refined by golden-section search."""
    if hi < lo:
        raise ValueError("need lo <= hi")
    cands = [lo, hi] + [x for x in marginal.density_peaks if lo <= x <= hi]
    best = max(float(marginal.pdf(x)) for x in cands)
    if hi > lo and math.isfinite(lo) and math.isfinite(hi):
        best = max(best, _golden_max(marginal.pdf, lo, hi))
    return best


def _golden_max(f, lo: float, hi: float, iters: int = 80) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = float(f(c)), float(f(d))
    for _ in range(iters):
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(f(d))
        else:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(f(c))
    return max(fc, fd)


# ---------------------------------------------------------------------------
# Remainder and exact window suprema
# ---------------------------------------------------------------------------

def remainder(path, marginal: MarginalModel, p: float) -> float:
    """R_n = xi_pn - xi_p + (F_n(xi_p) - p) / f(xi_p), all terms exact."""
    ecdf = build_ecdf(path)
    xi_p = marginal.quantile(p)
    f_p = float(marginal.pdf(xi_p))
    if f_p <= 0.0:
        raise DomainError(f"density vanishes at the {p}-quantile; representation undefined")
    xi_pn = sample_quantile(ecdf, p).value
    return xi_pn - xi_p + (float(ecdf.evaluate(xi_p)) - p) / f_p


def _sup_step_vs_smooth(ecdf: EmpiricalCdf, marginal: MarginalModel,
                        lo: float, hi: float, center_term: float) -> float:
    """Exact sup over [lo, hi] of |F_n(x) - F(x) - center_term|.

    Candidates: the endpoints (right-continuous values) and both one-sided
    values at every sample point in (lo, hi]."""
    sv = ecdf.sorted_values
    n = ecdf.n
    i0 = int(np.searchsorted(sv, lo, side="right"))
    i1 = int(np.searchsorted(sv, hi, side="right"))
    best = 0.0
    for x in (lo, hi):
        fx = float(marginal.cdf(x))
        best = max(best, abs(np.searchsorted(sv, x, side="right") / n - fx - center_term))
    if i1 > i0:
        pts = sv[i0:i1]
        f_true = np.asarray(marginal.cdf(pts), dtype=float)
        right = np.searchsorted(sv, pts, side="right") / n
        left = np.searchsorted(sv, pts, side="left") / n
        dev = np.maximum(np.abs(right - f_true - center_term),
                         np.abs(left - f_true - center_term))
        best = max(best, float(dev.max()))
    return best


def oscillation_sup(path, marginal: MarginalModel, p: float, win: WindowSpec) -> float:
    """Exact centered oscillation sup_{x in W} |(F_n(x)-F(x)) - (F_n(xi_p)-p)|."""
    ecdf = build_ecdf(path)
    lo, hi, _ = window_interval(win, marginal)
    center_term = float(ecdf.evaluate(win.center)) - p
    return _sup_step_vs_smooth(ecdf, marginal, lo, hi, center_term)


def sup_abs_deviation(path, marginal: MarginalModel, win: WindowSpec) -> float:
    """Exact uncentered sup_{x in W} |F_n(x) - F(x)|."""
    ecdf = build_ecdf(path)
    lo, hi, _ = window_interval(win, marginal)
    return _sup_step_vs_smooth(ecdf, marginal, lo, hi, 0.0)


# ---------------------------------------------------------------------------
# Envelopes
# ---------------------------------------------------------------------------

def envelope(kind: str, n: int, *, d: float | None = None,
             c3: float | None = None, theta: float | None = None) -> float:
    """Almost-sure envelope value of the given kind at sample size n."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    logn = math.log(n)
    if kind == "iid_modulus":
        return n ** -0.75 * logn ** 0.75
    if d is None or d <= 0.0 or c3 is None or c3 < 4.0:
        raise ValueError("envelopes need d > 0 and c3 >= 4")
    if kind == "oscillation_narrow":
        return (d + 4.0 * c3) * n ** -0.75 * logn
    if theta is None or theta <= 0.0:
        raise ValueError("wide-window envelopes need theta > 0")
    if kind == "oscillation_wide":
        return (1.0 + d) * math.sqrt((16.0 * c3 + theta) * logn / n)
    if kind == "sup_dev_wide":
        # exactly half the centered wide envelope (the 4n under the root)
        return (1.0 + d) * math.sqrt((16.0 * c3 + theta) * logn / n) / 2.0
    raise ValueError(f"kind must be one of {ENVELOPE_KINDS}, got {kind!r}")


# ---------------------------------------------------------------------------
# Sandwich and deviation checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichCheck:
    holds: bool
    fn_at_quantile: float


def quantile_sandwich_check(path, p: float) -> SandwichCheck:
    """Check p <= F_n(xi_pn) < p + 1/n, with no tolerance (the comparisons use
    the same float semantics as ECDF evaluation itself).

    Requires pairwise-distinct values: with ties the sandwich is not a
    theorem, so duplicates raise rather than report a spurious failure.
    """
    ecdf = build_ecdf(path)
    if np.unique(ecdf.sorted_values).size != ecdf.n:
        raise TiesError("sample has tied values; the sandwich requires a.s.-distinct samples")
    xi_pn = sample_quantile(ecdf, p).value
    fn = ecdf.count_le(xi_pn) / ecdf.n
    holds = p <= fn < p + 1.0 / ecdf.n
    return SandwichCheck(holds=holds, fn_at_quantile=fn)


@dataclass(frozen=True)
class DeviationCheck:
    deviation: float
    bound: float
    within: bool


def quantile_deviation_check(path, marginal: MarginalModel, p: float,
                             delta: float = 0.1, c3: float = 4.0) -> DeviationCheck:
    """|xi_pn - xi_p| against the almost-sure radius
    (2 sqrt(c3) + delta) (log n)^(1/2) / (f(xi_p) n^(1/2)). Total for any n >= 1."""
    ecdf = build_ecdf(path)
    xi_p = marginal.quantile(p)
    f_p = float(marginal.pdf(xi_p))
    if f_p <= 0.0:
        raise DomainError(f"density vanishes at the {p}-quantile")
    dev = abs(sample_quantile(ecdf, p).value - xi_p)
    n = ecdf.n
    bound = (2.0 * math.sqrt(c3) + delta) * math.sqrt(math.log(n)) / (f_p * math.sqrt(n)) if n > 1 else 0.0
    return DeviationCheck(deviation=dev, bound=bound, within=bool(dev <= bound))


# ---------------------------------------------------------------------------
# Full per-path diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BahadurDiagnostics:
    spec_id: str
    seed: int
    n: int
    p: float
    xi_p: float
    xi_pn: float
    remainder: float
    oscillation: float       # centered sup over the narrow window
    sup_dev_window: float    # uncentered sup over the wide window
    envelopes: dict
    violations: dict
    clipped: bool            # any window clipped to the marginal support


def diagnostics(path, marginal: MarginalModel, p: float, *,
                c3: float, c0: float = 1.0, theta: float = 1.0,
                delta: float = 0.1) -> BahadurDiagnostics:
    """All per-path statistics, their envelopes, and violation flags."""
    ecdf = build_ecdf(path)
    n = ecdf.n
    xi_p = marginal.quantile(p)
    f_p = float(marginal.pdf(xi_p))
    if f_p <= 0.0:
        raise DomainError(f"density vanishes at the {p}-quantile")
    xi_pn = sample_quantile(ecdf, p).value
    rem = xi_pn - xi_p + (float(ecdf.evaluate(xi_p)) - p) / f_p

    win_n = window("narrow", n, marginal=marginal, p=p, c0=c0)
    win_w = window("wide", n, marginal=marginal, p=p, theta=theta, c3=c3)
    lo_n, hi_n, clip_n = window_interval(win_n, marginal)
    lo_w, hi_w, clip_w = window_interval(win_w, marginal)
    center_term = float(ecdf.evaluate(xi_p)) - p
    osc = _sup_step_vs_smooth(ecdf, marginal, lo_n, hi_n, center_term)
    osc_wide = _sup_step_vs_smooth(ecdf, marginal, lo_w, hi_w, center_term)
    sup_dev = _sup_step_vs_smooth(ecdf, marginal, lo_w, hi_w, 0.0)

    d_n = sup_density(marginal, lo_n, hi_n)
    d_w = sup_density(marginal, lo_w, hi_w)
    eps_n = (2.0 * math.sqrt(c3) + delta) * math.sqrt(math.log(n)) / (f_p * math.sqrt(n))
    envs = {
        "oscillation_narrow": envelope("oscillation_narrow", n, d=d_n, c3=c3),
        "oscillation_wide": envelope("oscillation_wide", n, d=d_w, c3=c3, theta=theta),
        "sup_dev_wide": envelope("sup_dev_wide", n, d=d_w, c3=c3, theta=theta),
        "quantile_dev": eps_n,
    }
    viol = {
        "oscillation_narrow": osc > envs["oscillation_narrow"],
        "oscillation_wide": osc_wide > envs["oscillation_wide"],
        "sup_dev_wide": sup_dev > envs["sup_dev_wide"],
        "quantile_dev": abs(xi_pn - xi_p) > eps_n,
    }
    return BahadurDiagnostics(
        spec_id=getattr(path, "spec_id", "values"),
        seed=getattr(path, "seed", 0),
        n=n, p=p, xi_p=xi_p, xi_pn=xi_pn,
        remainder=rem, oscillation=osc, sup_dev_window=sup_dev,
        envelopes=envs, violations=viol, clipped=bool(clip_n or clip_w),
    )


_CSV_COLUMNS = (
    "spec_id", "seed", "n", "p", "remainder", "oscillation", "sup_dev_window",
    "env_oscillation_narrow", "env_oscillation_wide", "env_sup_dev_wide", "env_quantile_dev",
    "viol_oscillation_narrow", "viol_oscillation_wide", "viol_sup_dev_wide", "viol_quantile_dev",
)


def diagnostics_to_csv(rows, fh) -> None:
    fh.write(",".join(_CSV_COLUMNS) + "\n")
    for r in rows:
        cells = [
            r.spec_id, str(r.seed), str(r.n), f"{r.p:.17g}",
            f"{r.remainder:.17g}", f"{r.oscillation:.17g}", f"{r.sup_dev_window:.17g}",
        ]
        cells += [f"{r.envelopes[k]:.17g}" for k in
                  ("oscillation_narrow", "oscillation_wide", "sup_dev_wide", "quantile_dev")]
        cells += [str(int(r.violations[k])) for k in
                  ("oscillation_narrow", "oscillation_wide", "sup_dev_wide", "quantile_dev")]
        fh.write(",".join(cells) + "\n")
