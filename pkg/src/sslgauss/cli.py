"""Command-line front end.

Subcommands:
  simulate  run M trials at a single (L, n) point and write per-trial CSV
  sweep     run the full Monte Carlo grid over n or L
  region    classify an (alpha, beta, gamma) scaling point
  lowdeg    degree-D likelihood-ratio norm: exact value, bound, MC fallback
  bounds    labeled/unlabeled recovery thresholds and their fusion verdict

Flags echo the resolved raw counts so output files are self-describing;
config-file values are overridden by explicit flags.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import harness, theory
from .errors import BoundInapplicableError, ExactInfeasibleError, SslgaussError
from .gmodel import dump_dataset

_NUM_FMT = "%.12g"


def _fmt(x) -> str:
    if isinstance(x, float):
        return _NUM_FMT % x
    return str(x)


def _kv(key: str, value, width: int = 12) -> str:
    return f"{key + ':':<{width + 1}} {_fmt(value)}"


def _add_problem_flags(sub: argparse.ArgumentParser, sweep: bool) -> None:
    g = sub.add_argument_group("problem (raw counts and exponent forms are "
                               "mutually exclusive per group)")
    g.add_argument("--p", type=int, default=None, help="ambient dimension (default 100000)")
    g.add_argument("--k", type=int, default=None, help="sparsity (group: --k | --alpha)")
    g.add_argument("--alpha", type=float, default=None,
                   help="sparsity exponent, k = floor(c1 * p**alpha) (default 0.4)")
    g.add_argument("--L", type=int, default=None,
                   help="labeled count (group: --L | --beta; default 200)")
    g.add_argument("--beta", type=float, default=None,
                   help="labeled exponent, L = floor(2 beta k log(p-k)/lambda)")
    g.add_argument("--n", type=int, default=None,
                   help="unlabeled count (group: --n | --gamma; default 1000)")
    g.add_argument("--gamma", type=float, default=None,
                   help="unlabeled exponent, n = floor(c2 * k**gamma / lambda**2)")
    g.add_argument("--c1", type=float, default=None, help="prefactor for k (default 1.0)")
    g.add_argument("--c2", type=float, default=None, help="prefactor for n (default 1.0)")
    g.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="separation ||mu||^2 (default 3.0)")
    r = sub.add_argument_group("run")
    r.add_argument("--methods", type=str, default=None,
                   help="comma-separated method tags (default: all registered)")
    r.add_argument("--trials", type=int, default=None, help="Monte Carlo trials M (default 50)")
    r.add_argument("--seed", type=int, default=None, help="master seed (default 1729)")
    r.add_argument("--Gamma", dest="Gamma", type=float, default=None,
                   help="self-training confidence threshold (default 0.8)")
    r.add_argument("--beta-tilde", dest="beta_tilde", type=str, default=None,
                   help="screening factor in (0,1) or 'auto' (default auto)")
    r.add_argument("--config", type=str, default=None,
                   help="config file; explicit flags override its values")
    r.add_argument("--out", type=str, default=None, help="per-trial CSV output path")
    r.add_argument("--threads", type=int, default=None, help="worker processes (default 1)")
    r.add_argument("--f32", action="store_const", const=True, default=None,
                   help="store datasets in float32 (metrics stay float64)")
    r.add_argument("--dump", type=str, default=None,
                   help="dump trial 0's dataset to this path (binary)")
    if sweep:
        r.add_argument("--sweep-axis", dest="sweep_axis", type=str, default=None,
                       choices=list(harness.SWEEP_AXES), help="grid axis: n or L")
        r.add_argument("--sweep-values", dest="sweep_values", type=str, default=None,
                       help="comma-separated strictly increasing grid values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sslgauss",
        description="Sparse Gaussian mixture classification with labeled and "
                    "unlabeled samples: estimators, thresholds, experiments.")
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run trials at a single (L, n) point")
    _add_problem_flags(sim, sweep=False)

    swp = subs.add_parser("sweep", help="run a grid over n or L")
    _add_problem_flags(swp, sweep=True)

    reg = subs.add_parser("region", help="classify an (alpha, beta, gamma) point")
    reg.add_argument("--alpha", type=float, required=True, help="sparsity exponent in (0, 1/2)")
    reg.add_argument("--beta", type=float, required=True, help="labeled exponent >= 0")
    reg.add_argument("--gamma", type=float, required=True, help="unlabeled exponent >= 0")

    low = subs.add_parser("lowdeg", help="degree-D likelihood-ratio norm")
    low.add_argument("--p", type=int, required=True, help="ambient dimension")
    low.add_argument("--k", type=int, required=True, help="sparsity")
    low.add_argument("--L", type=int, default=0, help="labeled count (default 0)")
    low.add_argument("--n", type=int, default=0, help="unlabeled count (default 0)")
    low.add_argument("--lambda", dest="lam", type=float, default=3.0,
                     help="separation (default 3.0)")
    low.add_argument("--D", type=int, required=True, help="max polynomial degree")
    low.add_argument("--epsilon", type=float, default=None,
                     help="slack in the bound exponent (default 1/2 - alpha - beta)")
    low.add_argument("--mc-samples", dest="mc_samples", type=int, default=200000,
                     help="Monte Carlo fallback sample count (default 200000)")
    low.add_argument("--seed", type=int, default=1729, help="MC seed (default 1729)")

    bnd = subs.add_parser("bounds", help="recovery thresholds and fusion verdict")
    bnd.add_argument("--p", type=int, required=True, help="ambient dimension")
    bnd.add_argument("--k", type=int, required=True, help="sparsity")
    bnd.add_argument("--lambda", dest="lam", type=float, required=True, help="separation")
    bnd.add_argument("--delta", type=float, default=0.0,
                     help="confidence level in [0, 1] (default 0)")
    bnd.add_argument("--L", type=int, default=0, help="labeled count (default 0)")
    bnd.add_argument("--n", type=int, default=0, help="unlabeled count (default 0)")
    bnd.add_argument("--out", type=str, default=None, help="write the CSV row here")
    return parser


def _collect_experiment(args: argparse.Namespace, sweep: bool) -> harness.ExperimentConfig:
    raw: dict = {}
    if args.config:
        with open(args.config) as fh:
            raw.update(harness.parse_config_text(fh.read(), source=args.config))
    flag_keys = {"p": args.p, "k": args.k, "alpha": args.alpha, "L": args.L,
                 "beta": args.beta, "n": args.n, "gamma": args.gamma,
                 "c1": args.c1, "c2": args.c2, "lambda": args.lam,
                 "methods": args.methods, "trials": args.trials, "seed": args.seed,
                 "Gamma": args.Gamma, "beta_tilde": args.beta_tilde,
                 "out": args.out, "threads": args.threads, "f32": args.f32}
    if sweep:
        flag_keys["sweep_axis"] = args.sweep_axis
        flag_keys["sweep_values"] = args.sweep_values
    for key, value in flag_keys.items():
        if value is not None:
            # explicit flags override the config file; drop the file's twin
            # from the same exclusive parameter group
            for a, b in (("k", "alpha"), ("alpha", "k"), ("L", "beta"),
                         ("beta", "L"), ("n", "gamma"), ("gamma", "n")):
                if key == a and b in raw:
                    del raw[b]
            raw[key] = value
    return harness.config_from_dict(raw)


def _echo_config(config: harness.ExperimentConfig) -> None:
    pp = config.params
    print(_kv("p", pp.p))
    print(_kv("k", pp.k))
    print(_kv("lambda", pp.lam))
    print(_kv("L", pp.L))
    print(_kv("n", pp.n))
    print(_kv("seed", pp.seed))
    print(_kv("methods", ",".join(config.methods)))
    print(_kv("trials", config.trials))
    print(_kv("Gamma", config.gamma_threshold))
    print(_kv("beta_tilde", config.beta_tilde))
    if config.sweep_axis:
        print(_kv("sweep_axis", config.sweep_axis))
        print(_kv("sweep_values", ",".join(str(v) for v in config.sweep_values)))


def _run_experiment(args: argparse.Namespace, sweep: bool) -> int:
    config = _collect_experiment(args, sweep)
    if sweep and config.sweep_axis is None:
        print("error: sweep requires --sweep-axis and --sweep-values", file=sys.stderr)
        return 2
    _echo_config(config)
    if args.dump:
        _, ds = harness.trial_ground_truth(config, 0)
        dump_dataset(ds, args.dump)
        print(_kv("dump", args.dump))
    records, aggs = harness.run_sweep(config)
    if config.out_path:
        harness.write_csv(records, config.out_path)
        harness.write_aggregates(aggs, config.out_path + ".agg.csv")
        print(_kv("out", config.out_path))
        print(_kv("out_agg", config.out_path + ".agg.csv"))
    print()
    print("method,L,n = overlap_mean gen_error_mean excess_risk_mean (count, failures)")
    for row in aggs:
        print(f"{row.method},{row.L},{row.n} = {_fmt(row.overlap_mean)} "
              f"{_fmt(row.gen_error_mean)} {_fmt(row.excess_risk_mean)} "
              f"({row.count}, {row.failures})")
    failures = sum(1 for r in records if r.failed)
    if failures:
        print(f"\n{failures} of {len(records)} trials failed:", file=sys.stderr)
        for rec in records:
            if rec.failed:
                print(f"  {rec.method} L={rec.L} n={rec.n} trial={rec.trial}: {rec.error}",
                      file=sys.stderr)
        return 1
    return 0


def _run_region(args: argparse.Namespace) -> int:
    label = theory.region_classify(args.alpha, args.beta, args.gamma)
    print(_kv("region", label.value))
    print(_kv("1-alpha", 1.0 - args.alpha))
    print(_kv("1-gamma*alpha", 1.0 - args.gamma * args.alpha))
    print(_kv("0.5-alpha", 0.5 - args.alpha))
    return 0


def _run_lowdeg(args: argparse.Namespace) -> int:
    params = theory.LowDegParams(p=args.p, k=args.k, L=args.L, n=args.n,
                                 lam=args.lam, D=args.D)
    exact = None
    try:
        exact = theory.lowdeg_norm_exact(params)
        print(_kv("exact", exact, width=14))
    except ExactInfeasibleError as err:
        print(_kv("exact", f"infeasible ({err})", width=14))
    try:
        bound = theory.lowdeg_norm_upper_bound(params, epsilon=args.epsilon)
        print(_kv("bound", bound, width=14))
    except BoundInapplicableError as err:
        print(_kv("bound", f"inapplicable ({err})", width=14))
    if exact is None:
        print("warning: exact value infeasible; falling back to Monte Carlo",
              file=sys.stderr)
        est, se = theory.lowdeg_norm_mc(params, n_samples=args.mc_samples, seed=args.seed)
        print(_kv("mc_estimate", est, width=14))
        print(_kv("mc_stderr", se, width=14))
    alpha = theory.implied_alpha(params)
    beta = theory.implied_beta(params)
    print(_kv("alpha_implied", alpha, width=14))
    print(_kv("beta_implied", beta, width=14))
    gamma = (math.log(params.n * params.lam ** 2) / math.log(params.k)
             if params.k >= 2 and params.n >= 1 and params.lam > 0 else math.nan)
    print(_kv("gamma_implied", gamma, width=14))
    hard = (math.isfinite(beta) and beta < 0.5 - alpha
            and math.isfinite(gamma) and gamma < 2.0)
    print(_kv("hard_regime", "true" if hard else "false", width=14))
    return 0


def _run_bounds(args: argparse.Namespace) -> int:
    report = theory.fusion_verdict(args.L, args.n, args.k, args.lam, args.p, args.delta)
    print(_kv("sl_max_L", report.sl_max_L))
    print(_kv("ul_max_n", report.ul_max_n))
    print(_kv("delta", report.delta))
    print(_kv("L", args.L))
    print(_kv("n", args.n))
    print(_kv("q", report.q))
    print(_kv("verdict", report.verdict.value))
    header = "p,k,lambda,delta,L,n,sl_max_L,ul_max_n,q,verdict"
    row = ",".join([str(args.p), str(args.k), repr(float(args.lam)),
                    repr(float(args.delta)), str(args.L), str(args.n),
                    repr(report.sl_max_L), repr(report.ul_max_n),
                    repr(report.q), report.verdict.value])
    print(header)
    print(row)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(header + "\n" + row + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return _run_experiment(args, sweep=False)
        if args.command == "sweep":
            return _run_experiment(args, sweep=True)
        if args.command == "region":
            return _run_region(args)
        if args.command == "lowdeg":
            return _run_lowdeg(args)
        if args.command == "bounds":
            return _run_bounds(args)
    except SslgaussError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
