"""Command-line front end: ``mhkit {sample,sweep,analyze,discrete,anneal}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import discrete
from .acceptance import Barker, Standard
from .annealing import anneal
from .chain import run_chain, run_within_gibbs
from .config import FUNCTIONS, load_config
from .errors import ConfigurationError, MHError, ValidationError
from .traceio import dump_json, read_trace_csv, summarize, write_acf_csv, write_json, write_trace_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(message)


def _echo(args, text):
    if not args.quiet:
        sys.stdout.write(text)


def _out_dir(args) -> Path:
    if args.out is None:
        raise ConfigurationError("--out is required for this subcommand")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run(cfg, sigma=None, seed=None):
    """One chain for a run config, optionally at another sigma; returns the rows kept for output."""
    ccfg = cfg.chain_config(seed)
    rule = cfg.rule()
    if ccfg.mode == "componentwise":
        trace = run_within_gibbs(ccfg, cfg.target(), cfg.coordinate_proposals(sigma), rule)
    else:
        trace = run_chain(ccfg, cfg.target(), cfg.proposal(sigma), rule)
    if not cfg.get("chain.keep_burnin", False) and ccfg.burn_in:
        trace = trace.discard(ccfg.burn_in)
    thin = cfg.get("chain.thin", 1)
    if thin > 1:
        trace = trace.thin(thin)
    return trace


def cmd_sample(args) -> int:
    cfg = load_config(args.config, "sample", args.seed)
    if args.chains is not None:
        if args.chains < 1:
            raise ConfigurationError("--chains must be >= 1")
        cfg.values["chain.chains"] = args.chains
    if args.keep_burnin:
        cfg.values["chain.keep_burnin"] = True
    out = _out_dir(args)
    chains = []
    for k in range(cfg.n_chains):
        seed = cfg.seed + k
        trace = _run(cfg, seed=seed)
        summary, acf = summarize(trace, cfg.functions, cfg.k_max)
        write_trace_csv(out / f"chain_{k}.csv", trace)
        write_acf_csv(out / f"acf_{k}.csv", acf)
        chains.append({"chain": k, "seed": seed, "trace_file": f"chain_{k}.csv", "diagnostics": summary})
    result = {
        "command": "sample",
        "target": cfg.target().name,
        "proposal": cfg.require("proposal.kind"),
        "acceptance": cfg.get("acceptance.kind", "standard"),
        "functions": cfg.functions,
        "chains": chains,
    }
    write_json(out / "summary.json", result)
    for c in chains:
        ar = c["diagnostics"]["acceptance_rate"]
        _echo(args, f"chain {c['chain']} (seed {c['seed']}): mean_alpha={ar['mean_alpha']:.4f} "
                    f"empirical={ar['empirical']:.4f} ess/iter={c['diagnostics']['ess_per_iteration']}\n")
    return EXIT_OK


def sweep_rows(cfg):
    """Yield ``(sigma, mean_alpha, empirical_rate, ess_per_iteration)`` per grid point."""
    for sigma in cfg.require("sweep.sigmas"):
        trace = _run(cfg, sigma=float(sigma))
        summary, _ = summarize(trace, ("identity",), cfg.k_max)
        ar = summary["acceptance_rate"]
        yield float(sigma), ar["mean_alpha"], ar["empirical"], summary["ess_per_iteration"]


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, "sweep", args.seed)
    out = _out_dir(args)
    path = out / "sweep.csv"
    with open(path, "w") as fh:
        fh.write("sigma,mean_alpha,empirical_rate,ess_per_iteration\n")
        fh.flush()
        for row in sweep_rows(cfg):
            fh.write(",".join("" if v is None else repr(v) for v in row) + "\n")
            fh.flush()
            _echo(args, f"sigma={row[0]:g} mean_alpha={row[1]:.4f} empirical={row[2]:.4f} ess/iter={row[3]}\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        table = read_trace_csv(args.trace)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
    functions = [f.strip() for f in args.functions.split(",") if f.strip()]
    for f in functions:
        if f not in FUNCTIONS:
            raise ConfigurationError(f"unknown function {f!r}; choose from {FUNCTIONS}")
    summary, acf = summarize(table, functions, args.k_max)
    if args.out is not None:
        out = _out_dir(args)
        write_json(out / "analysis.json", summary)
        write_acf_csv(out / "acf.csv", acf)
    _echo(args, dump_json(summary))
    return EXIT_OK


def read_discrete_input(path):
    """``n``, then ``n*n`` matrix entries row-major, then ``n`` start-pmf entries."""
    try:
        tokens = Path(path).read_text().split()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from None
    try:
        n = int(tokens[0])
        nums = [float(t) for t in tokens[1:]]
    except (IndexError, ValueError):
        raise ConfigurationError(f"{path}: expected an integer n followed by numbers") from None
    if n < 1 or len(nums) != n * n + n:
        raise ConfigurationError(f"{path}: expected {n * n} matrix entries and {n} start entries, got {len(nums)} numbers")
    return np.array(nums[: n * n]).reshape(n, n), np.array(nums[n * n :])


def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in values]


def cmd_discrete(args) -> int:
    raw, p0 = read_discrete_input(args.input)
    try:
        K = discrete.validate(raw)
        p0 = discrete.validate_pmf(p0, K.size)
    except (ValidationError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from None
    wanted = [args.invariant, args.spectrum, args.burnin, args.balance, args.build_mh]
    if not any(wanted):
        args.invariant = args.spectrum = args.burnin = args.balance = True
    result = {"n": K.size}
    if args.invariant or args.balance:
        pi = discrete.invariant_pmf(K, args.tol)
        if args.invariant:
            result["invariant"] = pi.tolist()
    if args.spectrum:
        result["spectrum"] = _complex_pairs(discrete.spectrum(K))
    if args.burnin:
        result["burn_in"] = discrete.burn_in_length(K, p0, args.decimals)
    if args.balance:
        rep = discrete.detailed_balance_check(K, pi)
        result["balance"] = {"max_violation": rep.max_violation, "pair": rep.pair}
    if args.build_mh:
        # the matrix is the proposal, the start vector is the target pmf
        rule = Barker() if args.rule == "barker" else Standard()
        try:
            mh = discrete.build_mh_kernel(p0, K, rule)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        rep = discrete.detailed_balance_check(mh, p0)
        result["mh_kernel"] = {
            "rule": args.rule,
            "matrix": mh.entries.tolist(),
            "balance": {"max_violation": rep.max_violation, "pair": rep.pair},
            "stationarity_residual": float(np.max(np.abs(mh.entries @ p0 - p0))),
        }
    if args.out is not None:
        write_json(_out_dir(args) / "discrete.json", result)
    _echo(args, dump_json(result))
    return EXIT_OK


def cmd_anneal(args) -> int:
    cfg = load_config(args.config, "anneal", args.seed)
    out = _out_dir(args)
    schedule = cfg.schedule()
    runs = []
    for k in range(cfg.n_chains):
        ccfg = cfg.chain_config(cfg.seed + k)
        res = anneal(cfg.target(), cfg.proposal(), schedule, ccfg)
        runs.append({"run": k, "seed": ccfg.seed, **res.to_dict()})
    write_json(out / "anneal.json", {"command": "anneal", "runs": runs})
    for r in runs:
        _echo(args, f"run {r['run']} (seed {r['seed']}): best_log_density={r['best_log_density']!r} "
                    f"at iteration {r['iterations_to_best']}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="override chain.seed")
    common.add_argument("--quiet", action="store_true", help="suppress stdout")

    parser = _Parser(prog="mhkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="run MH chains and write traces")
    p.add_argument("--chains", type=int, help="override chain.chains")
    p.add_argument("--keep-burnin", action="store_true", help="write burn-in rows too")
    p.set_defaults(func=cmd_sample, needs_config=True)

    p = sub.add_parser("sweep", parents=[common], help="acceptance/efficiency over a sigma grid")
    p.set_defaults(func=cmd_sweep, needs_config=True)

    p = sub.add_parser("analyze", parents=[common], help="diagnostics for a trace CSV")
    p.add_argument("trace")
    p.add_argument("--functions", default="identity", help="comma-separated: identity,squared")
    p.add_argument("--k-max", type=int, default=None)
    p.set_defaults(func=cmd_analyze, needs_config=False)

    p = sub.add_parser("discrete", parents=[common], help="finite-state kernel analysis")
    p.add_argument("input")
    p.add_argument("--invariant", action="store_true")
    p.add_argument("--spectrum", action="store_true")
    p.add_argument("--burnin", action="store_true")
    p.add_argument("--balance", action="store_true")
    p.add_argument("--build-mh", action="store_true", help="treat the matrix as a proposal and the start pmf as target")
    p.add_argument("--rule", choices=("standard", "barker"), default="standard")
    p.add_argument("--decimals", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_discrete, needs_config=False)

    p = sub.add_parser("anneal", parents=[common], help="simulated annealing")
    p.set_defaults(func=cmd_anneal, needs_config=True)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.needs_config and args.config is None:
            raise ConfigurationError("--config is required")
        return args.func(args)
    except ConfigurationError as exc:
        print(f"mhkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MHError, ArithmeticError, ValueError, RuntimeError) as exc:
        where = getattr(exc, "iteration", None)
        suffix = f" at iteration {where}" if where is not None else ""
        print(f"mhkit: runtime error{suffix}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
