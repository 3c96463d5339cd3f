"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 infeasible or trivial bound,
4 optimiser did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import yaml

from . import bounds, capacity, core, econ, forecasters, mixing, montecarlo, srm, statespace, volatility
from .optim import OptimizerConfig

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NONCONVERGENCE = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def g6(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{x:.6g}"
    return str(x)


def parse_profile(spec) -> mixing.MixingProfile:
    """Profile from a CLI string (``iid``, ``ibm``, ``const:b``, ``exp:c1,c2[,kappa]``,
    ``alg:c1,r``, ``table:path.csv``) or a config mapping."""
    if isinstance(spec, dict):
        kind = spec.get("kind", "iid")
        if kind == "table":
            return mixing.MixingProfile.table({int(k): float(v) for k, v in spec["table"].items()})
        if kind == "exponential":
            return mixing.MixingProfile.exponential(spec["c1"], spec["c2"], spec.get("kappa", 1.0))
        if kind == "algebraic":
            return mixing.MixingProfile.algebraic(spec["c1"], spec["r"])
        if kind == "constant":
            return mixing.MixingProfile.constant(spec["beta"])
        spec = kind
    spec = str(spec or "iid")
    head, _, rest = spec.partition(":")
    if head == "iid":
        return mixing.MixingProfile.independent()
    if head == "ibm":
        return mixing.IBM_PROFILE
    if head == "const":
        return mixing.MixingProfile.constant(float(rest))
    if head == "table":
        return mixing.load_mixing_table(rest)
    nums = [float(v) for v in rest.split(",") if v]
    if head == "exp":
        return mixing.MixingProfile.exponential(*nums)
    if head == "alg":
        return mixing.MixingProfile.algebraic(*nums)
    raise CliError(f"unknown mixing profile {spec!r}")


def _plan(args, n: int, d: int, vcd: int, profile) -> mixing.BlockingPlan:
    if args.mu is not None:
        if args.a is None:
            raise CliError("--mu requires --a")
        beta = mixing.beta_at(profile, args.a - d) if args.a > d else 1.0
        return mixing.BlockingPlan(args.mu, args.a, d, n, beta)
    return mixing.choose_blocks(n, d, profile, args.eta, vcd, args.M, args.variant)


def _fit_descriptor(series: core.TimeSeries, desc: capacity.ModelClassDescriptor, intercept: bool = True):
    if desc.kind == "mean":
        return forecasters.fit_mean(series), 0
    if desc.kind == "ar":
        return forecasters.fit_ar(series, desc.d, intercept), desc.d
    if desc.kind == "var":
        if desc.k != series.p:
            raise CliError(f"var({desc.k},{desc.d}) does not match a {series.p}-column series")
        return forecasters.fit_var(series, desc.d, intercept), desc.d
    raise CliError(f"cannot fit model class {desc.kind!r} from the CLI")


def _echo(args) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
            if k not in ("func",) and v is not None}


def cmd_bound(args) -> int:
    profile = parse_profile(args.profile)
    desc = capacity.ModelClassDescriptor.parse(args.model) if args.model else None
    if args.vcd is not None:
        vcd = args.vcd
    elif desc is not None:
        vcd = capacity.vc_dimension(desc)
    else:
        raise CliError("give --model or --vcd")
    try:
        vcd = capacity.finite_vcd(vcd)
    except capacity.InfiniteCapacityError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE)
    if args.series:
        series = core.read_series_csv(args.series)
        if desc is None:
            raise CliError("--series requires --model")
        fit, d = _fit_descriptor(series, desc)
        loss = core.LossSpec(args.loss)
        train = core.training_error(series, fit, d, loss)
        n = series.n
    else:
        if args.train is None or args.n is None:
            raise CliError("without --series give --train and --n")
        train, n = args.train, args.n
        d = args.d if args.d is not None else (desc.d if desc is not None else 0)
    plan = _plan(args, n, d, vcd, profile)
    report = bounds.risk_bound(
        bounds.BoundInputs(plan, vcd, args.eta, args.M, train, args.delta_d), args.variant)
    print("# input: " + json.dumps(_echo(args), sort_keys=True))
    print(report.to_text())
    if args.csv:
        row = report.as_row()
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(row))
            w.writeheader()
            w.writerow({k: g6(v) for k, v in row.items()})
    return EXIT_INFEASIBLE if report.trivial else EXIT_OK


def cmd_fit(args) -> int:
    print("# input: " + json.dumps(_echo(args), sort_keys=True))
    loss = core.LossSpec(args.loss)
    model = args.model.lower()
    if model == "sv":
        raw = core.read_series_csv(args.series)
        returns = volatility.log_returns(raw) if args.prices else raw
        y, dropped = volatility.linearize_returns(returns)
        init = volatility.SvParams(*args.init) if args.init else None
        fit = volatility.fit_sv(y, init, OptimizerConfig(maxiter=args.maxiter))
        pred = statespace.KalmanPredictor(fit.model, memory=args.d)
        train = core.training_error(y, pred, args.d, loss)
        p = fit.params
        print(f"dropped zero returns  {dropped}")
        print(f"n                     {y.n}")
        print(f"kappa                 {g6(p.kappa)}")
        print(f"phi                   {g6(p.phi)}")
        print(f"sigma_w2              {g6(p.sigma_w2)}")
        print(f"neg loglik            {g6(fit.neg_loglik)}")
        print(f"training error (d={args.d})  {g6(train)}")
        if args.delta_d:
            dd = statespace.delta_d_statespace(fit.model, y, args.d, loss, args.ey1)
            print(f"delta_d               {g6(dd.first_term)} + {g6(dd.second_term)} = {g6(dd.total)}")
        return EXIT_OK if fit.converged else EXIT_NONCONVERGENCE
    series = core.read_series_csv(args.series)
    if model == "var1-mle":
        k = series.p
        init = np.concatenate([0.5 * np.eye(k).ravel(), np.var(series.values, axis=0)])
        res = econ.penalized_mle(econ.var1_builder(k), series, econ.var1_priors(k), init,
                                OptimizerConfig(maxiter=args.maxiter))
        for name, v in res.as_dict().items():
            print(f"{name:<10}{g6(v)}")
        print(f"neg penalized loglik  {g6(res.objective)}")
        return EXIT_OK if res.converged else EXIT_NONCONVERGENCE
    desc = capacity.ModelClassDescriptor.parse(model)
    fit, d = _fit_descriptor(series, desc, not args.no_intercept)
    train = core.training_error(series, fit, d, loss)
    print(f"model           {fit.name}")
    print(f"intercept       {' '.join(g6(v) for v in fit.intercept)}")
    for lag in range(fit.d):
        print(f"lag {lag + 1}           " + "; ".join(" ".join(g6(v) for v in row) for row in fit.coefs[lag]))
    print(f"vcd             {capacity.vc_dimension(desc)}")
    print(f"training error  {g6(train)}")
    return EXIT_OK


def cmd_srm(args) -> int:
    cfg = yaml.safe_load(Path(args.config).read_text())
    cands = srm.candidates_from_config(cfg)
    profile = parse_profile(cfg.get("profile")) if cfg.get("profile") is not None else None
    res = srm.srm_select(
        cands, eta=float(cfg.get("eta", args.eta)), M=float(cfg.get("M", args.M)),
        profile=profile, variant=cfg.get("variant", args.variant), baseline=cfg.get("baseline"),
    )
    print("# input: " + json.dumps({"config": str(args.config), **cfg}, sort_keys=True, default=str))
    print(res.to_text())
    print(f"selected: {res.winner.name}")
    if args.csv:
        Path(args.csv).write_text(res.to_csv())
    return EXIT_INFEASIBLE if res.all_trivial else EXIT_OK


def cmd_tradeoff(args) -> int:
    mus = range(args.mu_min, args.mu_max + 1, args.mu_step)
    eps = np.linspace(args.eps_min, args.eps_max, args.eps_num)
    grid = bounds.tradeoff_grid(mus, eps, args.vcd, args.beta, args.exponent)
    grid.write_csv(args.out, args.boundary)
    print("# input: " + json.dumps(_echo(args), sort_keys=True))
    print(f"wrote {grid.log_prob.size} cells to {args.out}"
          + (f" and boundary curve to {args.boundary}" if args.boundary else ""))
    return EXIT_OK


def _write_columns(path, header: List[str], cols, index=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow((["date"] if index is not None else []) + header)
        for i in range(len(cols[0])):
            w.writerow(([index[i]] if index is not None else []) + [g6(float(c[i])) for c in cols])


def cmd_hpfilter(args) -> int:
    series = core.read_series_csv(args.series)
    trend = np.asarray(econ.hp_filter(series, args.lam)).reshape(series.values.shape)
    header, cols = [], []
    names = series.name.split(",") if series.p > 1 else [series.name or "x"]
    for j in range(series.p):
        cyc = (econ.detrend(series.values[:, j], trend[:, j]) if args.log
               else series.values[:, j] - trend[:, j])
        header += [f"{names[j]}_trend" if series.p > 1 else "trend",
                   f"{names[j]}_cycle" if series.p > 1 else "cycle"]
        cols += [trend[:, j], cyc]
    _write_columns(args.out, header, cols, series.index)
    print(f"wrote trend/cycle for {series.p} column(s), n={series.n}, lambda={g6(args.lam)} to {args.out}")
    return EXIT_OK


def cmd_fredprep(args) -> int:
    data = econ.read_fred_csv(args.fred)
    missing = [sid for sid in econ.FRED_IDS if sid not in data]
    if missing:
        raise CliError(f"missing FRED series: {', '.join(missing)}")
    macro = econ.fred_transform(*(data[sid] for sid in econ.FRED_IDS))
    raw = [macro.output, macro.consumption, macro.investment, macro.hours]
    dev = [econ.detrend(x, econ.hp_filter(x, args.lam)) for x in raw]
    _write_columns(args.out, ["y", "c", "i", "h"], dev, macro.index)
    print(f"wrote {len(dev[0])} detrended observations to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.config:
        cfg = yaml.safe_load(Path(args.config).read_text())
        model = statespace.StateSpaceModel.from_dict(cfg.get("model", cfg))
        series = statespace.simulate_statespace(model, args.n, args.seed)
    elif args.sv:
        series = volatility.simulate_sv(volatility.SvParams(*args.sv), args.n, args.seed)
    elif args.ar1 is not None:
        series = statespace.simulate_statespace(statespace.ar1_model(args.ar1, args.sigma2), args.n, args.seed)
    else:
        series = statespace.simulate_statespace(statespace.white_noise_model(args.sigma2), args.n, args.seed)
    cols = [series.values[:, j] for j in range(series.p)]
    _write_columns(args.out, [f"y{j + 1}" for j in range(series.p)], cols)
    print(f"wrote {series.n} x {series.p} simulated series (seed={args.seed}) to {args.out}")
    return EXIT_OK


DEFAULT_SCENARIOS = [
    {"name": "iid-mean", "process": {"kind": "white-noise", "sigma2": 1.0}, "class": "mean",
     "profile": "iid"},
    {"name": "ar1-ar1", "process": {"kind": "ar1", "phi": 0.9, "sigma2": 1.0}, "class": "ar(1)",
     "profile": {"kind": "exponential", "c1": 1.0, "c2": -math.log(0.9), "kappa": 1.0}},
]


def _scenario_process(spec: dict):
    kind = spec.get("kind")
    if kind == "white-noise":
        return statespace.white_noise_model(float(spec.get("sigma2", 1.0)))
    if kind == "ar1":
        return statespace.ar1_model(float(spec["phi"]), float(spec.get("sigma2", 1.0)))
    if kind == "statespace":
        return statespace.StateSpaceModel.from_dict(spec)
    raise CliError(f"unknown process kind {kind!r}")


def _scenario_class(text: str) -> montecarlo.ModelClass:
    desc = capacity.ModelClassDescriptor.parse(text)
    if desc.kind == "mean":
        return montecarlo.MEAN_CLASS
    if desc.kind == "ar":
        return montecarlo.ar_class(desc.d)
    raise CliError(f"coverage supports mean and ar(d) classes, got {text!r}")


def cmd_coverage(args) -> int:
    scenarios = DEFAULT_SCENARIOS
    if args.config:
        scenarios = yaml.safe_load(Path(args.config).read_text())["scenarios"]
    print("# input: " + json.dumps(_echo(args), sort_keys=True))
    rows = []
    for sc in scenarios:
        res = montecarlo.coverage_experiment(
            _scenario_process(sc["process"]), _scenario_class(sc["class"]),
            eta=float(sc.get("eta", args.eta)), profile=parse_profile(sc.get("profile")),
            n=int(sc.get("n", args.n)), reps=int(sc.get("reps", args.reps)), seed=args.seed,
            risk_reps=args.risk_reps, variant=args.variant,
        )
        rows.append((sc["name"], res))
        print(f"{sc['name']:<12} reps={res.reps} coverage={g6(res.coverage)} "
              f"mean_slack={g6(res.mean_slack)} p={g6(res.p_value)} "
              f"{'ok' if res.passes() else 'BELOW TARGET'}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scenario", "reps", "coverage", "mean_slack"])
            for name, res in rows:
                w.writerow([name, res.reps, g6(res.coverage), g6(res.mean_slack)])
    return EXIT_OK


def _common_bound_args(p):
    p.add_argument("--eta", type=float, default=0.15)
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--variant", choices=["as-printed", "exact-inversion"], default="as-printed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsbounds", description="Risk bounds for time-series forecasters")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="risk bound for one model")
    p.add_argument("--series", type=Path)
    p.add_argument("--model", help="mean, ar(d), var(k,d), linear(p), sine")
    p.add_argument("--vcd", type=int)
    p.add_argument("--train", type=float)
    p.add_argument("--delta-d", dest="delta_d", type=float, default=0.0)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--mu", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--profile", default="iid")
    p.add_argument("--loss", default="squared", choices=["squared", "absolute", "euclidean-norm"])
    p.add_argument("--csv", type=Path)
    _common_bound_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("fit", help="fit mean/ar/var/sv/var1-mle")
    p.add_argument("--series", type=Path, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--prices", action="store_true", help="sv: input holds prices, not log returns")
    p.add_argument("--init", type=float, nargs=3, metavar=("KAPPA", "PHI", "SIGMA_W2"))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--delta-d", dest="delta_d", action="store_true")
    p.add_argument("--ey1", type=float, default=1.0)
    p.add_argument("--maxiter", type=int, default=4000)
    p.add_argument("--loss", default="squared", choices=["squared", "absolute", "euclidean-norm"])
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("srm", help="bound-based model selection")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--csv", type=Path)
    _common_bound_args(p)
    p.set_defaults(func=cmd_srm)

    p = sub.add_parser("tradeoff", help="(mu, eps) probability-bound grid")
    p.add_argument("--mu-min", type=int, default=1)
    p.add_argument("--mu-max", type=int, default=1000)
    p.add_argument("--mu-step", type=int, default=10)
    p.add_argument("--eps-min", type=float, default=0.01)
    p.add_argument("--eps-max", type=float, default=1.0)
    p.add_argument("--eps-num", type=int, default=100)
    p.add_argument("--vcd", type=int, default=1)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--exponent", choices=["exact", "simplified"], default="exact")
    p.add_argument("--out", type=Path, default=Path("tradeoff.csv"))
    p.add_argument("--boundary", type=Path)
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("hpfilter", help="Hodrick-Prescott trend and cycle")
    p.add_argument("--series", type=Path, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1600.0)
    p.add_argument("--log", action="store_true", help="cycle as log deviation from trend")
    p.add_argument("--out", type=Path, default=Path("hp.csv"))
    p.set_defaults(func=cmd_hpfilter)

    p = sub.add_parser("fredprep", help="FRED per-capita transform, HP filter, detrend")
    p.add_argument("--fred", type=Path, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1600.0)
    p.add_argument("--out", type=Path, default=Path("macro.csv"))
    p.set_defaults(func=cmd_fredprep)

    p = sub.add_parser("simulate", help="simulate a synthetic series")
    p.add_argument("--config", type=Path, help="YAML state-space model")
    p.add_argument("--ar1", type=float, metavar="PHI")
    p.add_argument("--sv", type=float, nargs=3, metavar=("KAPPA", "PHI", "SIGMA_W2"))
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("simulated.csv"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coverage", help="Monte-Carlo coverage of the bounds")
    p.add_argument("--config", type=Path)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--risk-reps", dest="risk_reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", type=Path)
    _common_bound_args(p)
    p.set_defaults(func=cmd_coverage)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except mixing.InfeasibleBlockingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except capacity.InfiniteCapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValueError, FileNotFoundError, KeyError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
