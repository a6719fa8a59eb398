"""Command-line front end.

Subcommands:
  simulate  generate one path and write it as CSV
  rates     run an experiment sweep and fit the convergence rate
  bounds    tabulate the exponential tail bound against Monte-Carlo tails
  var       estimate Value-at-Risk from a price or return series
  report    re-render a stored JSON report table as CSV (or JSON)

Configs are flat JSON key-value files (schema in the README); every config
key can be overridden by a flag. MIXQUANT_JOBS selects the parallelism
degree (default: all cores).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from . import harness, processes
from .marginals import marginal_from_config


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _spec_from_args(cfg: dict, args) -> processes.ProcessSpec:
    if args.generator:
        cfg["generator"] = args.generator
    if args.marginal:
        cfg["marginal"] = args.marginal
    if args.m is not None:
        cfg["m"] = args.m
    if args.switch_prob is not None:
        cfg["switch_prob"] = args.switch_prob
    if args.transition is not None:
        cfg["transition"] = json.loads(args.transition)
    spec_cfg = cfg.get("spec", cfg)
    return processes.spec_from_config(spec_cfg)


def _add_spec_flags(sub) -> None:
    sub.add_argument("--generator", choices=("iid", "m_dependent", "markov_copula"))
    sub.add_argument("--marginal", help="uniform | exponential | normal")
    sub.add_argument("--m", type=int, help="dependence range for m_dependent")
    sub.add_argument("--switch-prob", dest="switch_prob", type=float,
                     help="two-state chain switch probability")
    sub.add_argument("--transition", help="JSON row-stochastic matrix for markov_copula")


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_args(cfg, args)
    n = args.n if args.n is not None else int(cfg.get("n", 1000))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    path = processes.generate(spec, n, seed)
    with open(args.out, "w") as fh:
        processes.path_to_csv(path, fh)
    print(f"wrote {n} values ({spec.spec_id}, seed {seed}) to {args.out}")
    return 0


def cmd_rates(args) -> int:
    cfg = _load_config(args.config)
    if args.n_grid:
        cfg["n_grid"] = [int(tok) for tok in args.n_grid.split(",")]
    if args.p is not None:
        cfg["p_list"] = [args.p]
    if args.reps is not None:
        cfg["reps"] = args.reps
    if args.master_seed is not None:
        cfg["master_seed"] = args.master_seed
    if args.statistic:
        cfg["statistic"] = args.statistic
    if args.aggregate:
        cfg["aggregate"] = args.aggregate
    if args.generator or args.marginal or args.m is not None \
            or args.switch_prob is not None or args.transition is not None:
        spec_cfg = dict(cfg.get("spec", {}))
        cfg["spec"] = spec_cfg
        _merge_spec_flags(spec_cfg, args)
    cfg.setdefault("spec", {"generator": "iid", "marginal": "uniform"})
    cfg.setdefault("p_list", [0.5])
    cfg.setdefault("n_grid", [2 ** k for k in range(10, 18)])
    cfg.setdefault("reps", 200)
    cfg.setdefault("master_seed", 0)
    if args.allow_large:
        cfg["allow_large"] = True

    config = harness.config_from_dict(cfg)
    raw_fh = open(args.raw_out, "w") if args.raw_out else None
    try:
        table = harness.run_experiment(config, raw_csv=raw_fh)
    finally:
        if raw_fh:
            raw_fh.close()
    fmt = "json" if args.out.endswith(".json") else "csv"
    harness.emit_report(table, fmt, args.out)
    print(f"wrote report table ({len(table.rows)} rows) to {args.out}")
    if args.fit_out:
        fit = harness.fit_rate(table)
        harness.emit_report(fit, "json" if args.fit_out.endswith(".json") else "csv", args.fit_out)
        print(f"fitted slope {fit.slope:.4f} (R^2 {fit.r_squared:.4f}) -> {args.fit_out}")
    return 0


def _merge_spec_flags(spec_cfg: dict, args) -> None:
    if args.generator:
        spec_cfg["generator"] = args.generator
    if args.marginal:
        spec_cfg["marginal"] = args.marginal
    if args.m is not None:
        spec_cfg["m"] = args.m
    if args.switch_prob is not None:
        spec_cfg["switch_prob"] = args.switch_prob
    if args.transition is not None:
        spec_cfg["transition"] = json.loads(args.transition)


def cmd_bounds(args) -> int:
    cfg = _load_config(args.config)
    spec = _spec_from_args(cfg, args)
    eps_grid = np.linspace(args.eps_min, args.eps_max, args.eps_points)
    table = bounds_mod.bound_vs_montecarlo(
        spec,
        bounds_mod.CenteredIndicator(threshold=args.threshold),
        n=args.n, beta=args.beta, eps_grid=eps_grid,
        reps=args.reps, seed=args.seed,
    )
    with open(args.out, "w") as fh:
        table.to_csv(fh)
    flagged = sum(r.flag for r in table.rows)
    print(f"wrote {len(table.rows)} rows to {args.out}; {flagged} flagged")
    return 1 if flagged else 0


def cmd_var(args) -> int:
    with open(args.input) as fh:
        series = harness.read_value_series(fh)
    est = harness.var_estimate(series, args.p, mode=args.mode)
    print(f"VaR(p={args.p:g}) = {est.var:.17g}")
    print(f"n = {est.n}")
    print(f"remainder order (log n / n)^(1/2) = {est.remainder_order:.6g}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(harness.canonical_json(
                {"var": est.var, "n": est.n, "remainder_order": est.remainder_order}))
            fh.write("\n")
    return 0


def cmd_report(args) -> int:
    with open(args.input) as fh:
        table = harness.load_table_json(fh.read())
    fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
    harness.emit_report(table, fmt, args.out)
    print(f"re-rendered {len(table.rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixquant", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a path and write CSV")
    sim.add_argument("--config")
    _add_spec_flags(sim)
    sim.add_argument("--n", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    rates = sub.add_parser("rates", help="experiment sweep + rate fit")
    rates.add_argument("--config")
    _add_spec_flags(rates)
    rates.add_argument("--n-grid", help="comma-separated sample sizes")
    rates.add_argument("--p", type=float)
    rates.add_argument("--reps", type=int)
    rates.add_argument("--master-seed", dest="master_seed", type=int)
    rates.add_argument("--statistic", choices=harness.STATISTICS)
    rates.add_argument("--aggregate", choices=harness.AGGREGATES)
    rates.add_argument("--allow-large", action="store_true")
    rates.add_argument("--out", required=True)
    rates.add_argument("--fit-out")
    rates.add_argument("--raw-out", help="per-replication statistic dump (CSV)")
    rates.set_defaults(func=cmd_rates)

    bnd = sub.add_parser("bounds", help="tail bound vs Monte Carlo")
    bnd.add_argument("--config")
    _add_spec_flags(bnd)
    bnd.add_argument("--n", type=int, default=1000)
    bnd.add_argument("--beta", type=float, default=0.25)
    bnd.add_argument("--threshold", type=float, default=0.5,
                     help="indicator threshold for the centered transform")
    bnd.add_argument("--reps", type=int, default=10000)
    bnd.add_argument("--seed", type=int, default=0)
    bnd.add_argument("--eps-min", type=float, default=1.0)
    bnd.add_argument("--eps-max", type=float, default=150.0)
    bnd.add_argument("--eps-points", type=int, default=20)
    bnd.add_argument("--out", required=True)
    bnd.set_defaults(func=cmd_bounds)

    var = sub.add_parser("var", help="Value-at-Risk from a series file")
    var.add_argument("--input", required=True, help="CSV, one value per line")
    var.add_argument("--mode", choices=("prices_given", "returns_given"),
                     default="prices_given")
    var.add_argument("-p", type=float, default=0.05)
    var.add_argument("--json-out")
    var.set_defaults(func=cmd_var)

    rep = sub.add_parser("report", help="re-render a stored JSON table")
    rep.add_argument("--input", required=True)
    rep.add_argument("--format", choices=("csv", "json"))
    rep.add_argument("--out", required=True)
    rep.set_defaults(func=cmd_report)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
