"""Monte-Carlo experiment orchestration, rate fits, VaR, and report emission.

An experiment sweeps a geometric n-grid and a list of quantile levels,
generates ``reps`` independent paths per cell from per-replication derived
seeds, computes one per-path statistic, aggregates it, and attaches the
matching almost-sure envelope together with the fraction of replications
exceeding it. Results are a pure function of the config (master seed
included): replications are keyed by index, so any parallel schedule -
controlled by the MIXQUANT_JOBS environment variable - produces
byte-identical reports.

Convergence rates are estimated by ordinary least squares on
(log n, log statistic); for the remainder statistic the fitted slope
estimates the exponent in its n^(-3/4) log n almost-sure order.

The VaR front end computes log-returns Y_t = log(X_t / X_{t-1}) when given
prices and reports the raw sample p-quantile of returns (loss-sign
conversion is left to the caller) annotated with the (log n / n)^(1/2)
remainder order - an accuracy scale, not a confidence interval.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np

from ._version import __version__
from .bahadur import envelope, oscillation_sup, remainder, sup_abs_deviation, sup_density, window, window_interval
from .empirical import build_ecdf, sample_quantile
from .errors import DataError, FitError, SpecError
from .marginals import MarginalModel
from .processes import ProcessSpec, derive_seed, float_key, generate, spec_from_config, spec_to_config

__all__ = [
    "STATISTICS",
    "AGGREGATES",
    "Constants",
    "RunConfig",
    "ReportRow",
    "ReportTable",
    "RateFit",
    "VarEstimate",
    "run_experiment",
    "fit_rate",
    "var_estimate",
    "emit_report",
    "canonical_json",
    "jobs_from_env",
    "load_table_json",
    "read_value_series",
]

STATISTICS = ("abs_remainder", "oscillation_narrow", "oscillation_wide", "sup_dev_wide")
AGGREGATES = ("median", "q90", "q99", "max")

# which envelope each statistic is reported against (the remainder has no
# constant-bearing envelope of its own; the narrow-window oscillation
# envelope shares its n^(-3/4) log n scale and is the reference used here)
_ENVELOPE_FOR = {
    "abs_remainder": "oscillation_narrow",
    "oscillation_narrow": "oscillation_narrow",
    "oscillation_wide": "oscillation_wide",
    "sup_dev_wide": "sup_dev_wide",
}


@dataclass(frozen=True)
class Constants:
    """Free positive constants of the windows/envelopes, all overridable."""

    c0: float = 1.0
    theta: float = 1.0
    delta: float = 0.1
    beta: float = 0.25


@dataclass(frozen=True)
class RunConfig:
    spec: ProcessSpec
    p_list: tuple
    n_grid: tuple
    reps: int
    master_seed: int
    statistic: str = "abs_remainder"
    aggregate: str = "median"
    constants: Constants = Constants()
    sample_budget: int = 500_000_000
    allow_large: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(p) for p in self.p_list))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if not self.p_list or not all(0.0 < p < 1.0 for p in self.p_list):
            raise ValueError("p_list must be nonempty with entries in (0,1)")
        if len(self.n_grid) == 0 or any(n < 16 for n in self.n_grid):
            raise ValueError("n_grid entries must be >= 16")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}")
        if self.aggregate not in AGGREGATES:
            raise ValueError(f"aggregate must be one of {AGGREGATES}")

    def total_samples(self) -> int:
        return self.reps * len(self.p_list) * sum(self.n_grid)

    def to_config_dict(self) -> dict:
        return {
            "spec": spec_to_config(self.spec),
            "p_list": list(self.p_list),
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "master_seed": self.master_seed,
            "statistic": self.statistic,
            "aggregate": self.aggregate,
            "constants": {
                "c0": self.constants.c0, "theta": self.constants.theta,
                "delta": self.constants.delta, "beta": self.constants.beta,
            },
        }

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_config_dict()).encode()).hexdigest()[:16]


def config_from_dict(cfg: dict) -> RunConfig:
    consts = cfg.get("constants", {})
    return RunConfig(
        spec=spec_from_config(cfg["spec"]),
        p_list=tuple(cfg["p_list"]),
        n_grid=tuple(cfg["n_grid"]),
        reps=int(cfg["reps"]),
        master_seed=int(cfg["master_seed"]),
        statistic=cfg.get("statistic", "abs_remainder"),
        aggregate=cfg.get("aggregate", "median"),
        constants=Constants(
            c0=float(consts.get("c0", 1.0)), theta=float(consts.get("theta", 1.0)),
            delta=float(consts.get("delta", 0.1)), beta=float(consts.get("beta", 0.25)),
        ),
        sample_budget=int(cfg.get("sample_budget", 500_000_000)),
        allow_large=bool(cfg.get("allow_large", False)),
    )


# ---------------------------------------------------------------------------
# Report table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    n: int
    p: float
    value: float              # aggregated statistic
    envelope_kind: str
    envelope: float
    violation_fraction: float
    reps: int


@dataclass(frozen=True)
class ReportTable:
    rows: tuple
    metadata: dict

    def row(self, n: int, p: float) -> ReportRow:
        for r in self.rows:
            if r.n == n and r.p == p:
                return r
        raise KeyError(f"no row for (n={n}, p={p})")

    def to_json(self) -> str:
        return canonical_json({
            "metadata": self.metadata,
            "rows": [
                {
                    "n": r.n, "p": r.p, "value": r.value,
                    "envelope_kind": r.envelope_kind, "envelope": r.envelope,
                    "violation_fraction": r.violation_fraction, "reps": r.reps,
                }
                for r in self.rows
            ],
        })

    def to_csv(self, fh: IO[str]) -> None:
        for key in sorted(self.metadata):
            fh.write(f"# {key}={self.metadata[key]}\n")
        fh.write("n,p,value,envelope_kind,envelope,violation_fraction,reps\n")
        for r in self.rows:
            fh.write(
                f"{r.n},{r.p:.17g},{r.value:.17g},{r.envelope_kind},"
                f"{r.envelope:.17g},{r.violation_fraction:.17g},{r.reps}\n"
            )


def load_table_json(text: str) -> ReportTable:
    obj = json.loads(text)
    rows = tuple(
        ReportRow(
            n=int(r["n"]), p=float(r["p"]), value=float(r["value"]),
            envelope_kind=r["envelope_kind"], envelope=float(r["envelope"]),
            violation_fraction=float(r["violation_fraction"]), reps=int(r["reps"]),
        )
        for r in obj["rows"]
    )
    return ReportTable(rows=rows, metadata=dict(obj["metadata"]))


# ---------------------------------------------------------------------------
# The per-replication statistic (module-level so worker processes can run it)
# ---------------------------------------------------------------------------

def _path_statistic(spec: ProcessSpec, n: int, p: float, statistic: str,
                    constants: Constants, seed: int) -> float:
    path = generate(spec, n, seed)
    if statistic == "abs_remainder":
        return abs(remainder(path, spec.marginal, p))
    if statistic == "oscillation_narrow":
        win = window("narrow", n, marginal=spec.marginal, p=p, c0=constants.c0)
        return oscillation_sup(path, spec.marginal, p, win)
    win = window("wide", n, marginal=spec.marginal, p=p,
                 theta=constants.theta, c3=spec.mixing.c3)
    if statistic == "oscillation_wide":
        return oscillation_sup(path, spec.marginal, p, win)
    if statistic == "sup_dev_wide":
        return sup_abs_deviation(path, spec.marginal, win)
    raise SpecError(f"unknown statistic {statistic!r}")


def _stats_chunk(args) -> tuple[int, int, list]:
    spec, n, p, statistic, constants, master_seed, cell_index, rep_start, rep_end = args
    out = []
    for rep in range(rep_start, rep_end):
        seed = derive_seed(master_seed, n, float_key(p), rep)
        out.append(_path_statistic(spec, n, p, statistic, constants, seed))
    return cell_index, rep_start, out


def jobs_from_env() -> int:
    """Parallelism degree: MIXQUANT_JOBS, defaulting to the available cores."""
    raw = os.environ.get("MIXQUANT_JOBS", "").strip()
    if raw:
        jobs = int(raw)
        if jobs < 1:
            raise ValueError("MIXQUANT_JOBS must be >= 1")
        return jobs
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Experiment driver
# ---------------------------------------------------------------------------

def run_experiment(config: RunConfig, raw_csv: IO[str] | None = None) -> ReportTable:
    """Full (n_grid x p_list) sweep; deterministic given the config.

    ``raw_csv`` optionally receives one line per replication (the per-path
    statistic, its envelope, and the violation flag) for audits.
    """
    total = config.total_samples()
    if total > config.sample_budget and not config.allow_large:
        raise ValueError(
            f"config asks for {total} total samples, above the budget "
            f"{config.sample_budget}; set allow_large=True to override"
        )

    cells = [(n, p) for n in config.n_grid for p in config.p_list]
    stats_by_cell = _run_cells(config, cells)

    if raw_csv is not None:
        raw_csv.write("spec_id,seed,n,p,rep,statistic,value,envelope,violation\n")

    rows = []
    env_kind = _ENVELOPE_FOR[config.statistic]
    for idx, (n, p) in enumerate(cells):
        stats = stats_by_cell[idx]
        env = _cell_envelope(config, n, p)
        viol = float(np.mean(stats > env))
        rows.append(ReportRow(
            n=n, p=p, value=_aggregate(stats, config.aggregate),
            envelope_kind=env_kind, envelope=env,
            violation_fraction=viol, reps=config.reps,
        ))
        if raw_csv is not None:
            for rep, s in enumerate(stats):
                seed = derive_seed(config.master_seed, n, float_key(p), rep)
                raw_csv.write(
                    f"{config.spec.spec_id},{seed},{n},{p:.17g},{rep},"
                    f"{config.statistic},{s:.17g},{env:.17g},{int(s > env)}\n"
                )

    metadata = {
        "spec_id": config.spec.spec_id,
        "statistic": config.statistic,
        "aggregate": config.aggregate,
        "master_seed": config.master_seed,
        "config_hash": config.config_hash(),
        "version": __version__,
    }
    return ReportTable(rows=tuple(rows), metadata=metadata)


def _run_cells(config: RunConfig, cells: list) -> dict[int, np.ndarray]:
    jobs = jobs_from_env()
    chunk = max(1, math.ceil(config.reps / max(jobs, 1)))
    tasks = []
    for idx, (n, p) in enumerate(cells):
        for start in range(0, config.reps, chunk):
            tasks.append((config.spec, n, p, config.statistic, config.constants,
                          config.master_seed, idx, start, min(start + chunk, config.reps)))

    results: dict[int, np.ndarray] = {
        idx: np.empty(config.reps) for idx in range(len(cells))
    }
    if jobs == 1 or len(tasks) == 1:
        outs = map(_stats_chunk, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        try:
            outs = list(pool.map(_stats_chunk, tasks))
        finally:
            pool.shutdown()
    for idx, start, vals in outs:
        results[idx][start:start + len(vals)] = vals
    return results


def _cell_envelope(config: RunConfig, n: int, p: float) -> float:
    spec, consts = config.spec, config.constants
    c3 = spec.mixing.c3
    kind = _ENVELOPE_FOR[config.statistic]
    wkind = "narrow" if kind == "oscillation_narrow" else "wide"
    win = window(wkind, n, marginal=spec.marginal, p=p,
                 c0=consts.c0, theta=consts.theta, c3=c3)
    lo, hi, _ = window_interval(win, spec.marginal)
    d = sup_density(spec.marginal, lo, hi)
    if kind == "oscillation_narrow":
        return envelope(kind, n, d=d, c3=c3)
    return envelope(kind, n, d=d, c3=c3, theta=consts.theta)


def _aggregate(stats: np.ndarray, kind: str) -> float:
    if kind == "median":
        return float(np.median(stats))
    if kind == "q90":
        return float(np.quantile(stats, 0.90))
    if kind == "q99":
        return float(np.quantile(stats, 0.99))
    return float(np.max(stats))


# ---------------------------------------------------------------------------
# Rate fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    points: tuple            # ((n, value), ...)
    slope: float
    intercept: float
    r_squared: float

    def to_json(self) -> str:
        return canonical_json({
            "points": [[n, v] for n, v in self.points],
            "slope": self.slope, "intercept": self.intercept,
            "r_squared": self.r_squared,
        })

    def to_csv(self, fh: IO[str]) -> None:
        fh.write(f"# slope={self.slope:.17g}\n# intercept={self.intercept:.17g}\n")
        fh.write(f"# r_squared={self.r_squared:.17g}\n")
        fh.write("n,value\n")
        for n, v in self.points:
            fh.write(f"{n},{v:.17g}\n")


def fit_rate(table: ReportTable, p: float | None = None, column: str = "value") -> RateFit:
    """OLS of log(statistic) on log(n); the slope estimates the rate exponent."""
    ps = sorted({r.p for r in table.rows})
    if p is None:
        if len(ps) != 1:
            raise FitError(f"table holds several quantile levels {ps}; pass p explicitly")
        p = ps[0]
    rows = sorted((r for r in table.rows if r.p == p), key=lambda r: r.n)
    if len(rows) < 4:
        raise FitError(f"need at least 4 grid points to fit a rate, got {len(rows)}")
    if rows and rows[0].reps < 50:
        raise FitError(f"rate fits need reps >= 50 per cell, got {rows[0].reps}")
    values = [getattr(r, "value" if column == "value" else column) for r in rows]
    bad = [(r.n, v) for r, v in zip(rows, values) if not v > 0.0]
    if bad:
        raise FitError(f"log-log fit impossible: nonpositive statistic at rows {bad}")

    x = np.log([r.n for r in rows])
    y = np.log(values)
    xbar, ybar = x.mean(), y.mean()
    sxx = float(np.sum((x - xbar) ** 2))
    slope = float(np.sum((x - xbar) * (y - ybar)) / sxx)
    intercept = float(ybar - slope * xbar)
    resid = y - (intercept + slope * x)
    sst = float(np.sum((y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / sst if sst > 0 else 1.0
    return RateFit(points=tuple((r.n, v) for r, v in zip(rows, values)),
                   slope=slope, intercept=intercept, r_squared=r2)


# ---------------------------------------------------------------------------
# Value-at-Risk
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarEstimate:
    var: float
    n: int
    remainder_order: float   # (log n / n)^(1/2), an accuracy scale


def var_estimate(series, p: float, mode: str = "returns_given") -> VarEstimate:
    """Sample p-quantile of (log-)returns as the level-p VaR.

    ``mode="prices_given"`` converts a positive price series to log-returns
    first. The p-quantile is reported raw (no loss-sign flip).
    """
    arr = np.asarray(series, dtype=float)
    if mode == "prices_given":
        if arr.size < 2:
            raise DataError("need at least 2 prices to form returns")
        if np.any(arr <= 0.0) or np.any(~np.isfinite(arr)):
            raise DataError("prices must be strictly positive and finite")
        returns = np.diff(np.log(arr))
    elif mode == "returns_given":
        returns = arr
    else:
        raise ValueError(f"mode must be 'prices_given' or 'returns_given', got {mode!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")
    n = returns.size
    if n * p < 1.0:
        warnings.warn(f"n*p = {n * p:.3g} < 1: the estimate is the sample minimum", stacklevel=2)
    v = sample_quantile(build_ecdf(returns), p).value
    order = math.sqrt(math.log(n) / n) if n >= 2 else math.nan
    return VarEstimate(var=v, n=n, remainder_order=order)


def read_value_series(fh: IO[str]) -> np.ndarray:
    """One value per line; '#' comments and a single non-numeric header allowed."""
    values = []
    for line in fh:
        token = line.strip().split(",")[0]
        if not token or token.startswith("#"):
            continue
        try:
            values.append(float(token))
        except ValueError:
            if values:
                raise DataError(f"non-numeric value {token!r} after data started")
            # header line
    if not values:
        raise DataError("no numeric values found")
    return np.asarray(values)


# ---------------------------------------------------------------------------
# Deterministic emission
# ---------------------------------------------------------------------------

def canonical_json(obj) -> str:
    """JSON with sorted keys and 17-significant-digit floats: identical inputs
    give identical bytes."""
    parts: list[str] = []
    _write_json(obj, parts)
    return "".join(parts)


def _write_json(obj, parts: list) -> None:
    if isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {key!r}")
            if i:
                parts.append(",")
            parts.append(json.dumps(key))
            parts.append(":")
            _write_json(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _write_json(item, parts)
        parts.append("]")
    elif isinstance(obj, bool) or obj is None:
        parts.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x}")
        parts.append(format(x, ".17g"))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def emit_report(obj, fmt: str, path) -> None:
    """Write a ReportTable or RateFit as CSV or JSON; bit-stable for equal inputs."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "json":
                fh.write(obj.to_json())
                fh.write("\n")
            else:
                obj.to_csv(fh)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
