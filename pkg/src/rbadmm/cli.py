"""Command line interface: ``rbadmm {sweep,aggregate,verify-scaling,recover}``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys

import numpy as np

from rbadmm import bench
from rbadmm.bpdn import BpdnProblem, assemble_random_recovery
from rbadmm.convergence import StoppingConfig
from rbadmm.core import run
from rbadmm.errors import ConfigurationError
from rbadmm.io import FormatError
from rbadmm.scaling import GraphFormScaling, ScalingTriple, verify_equivariance


def _add_sweep_args(p):
    p.add_argument("--config", help="JSON file with ExperimentSpec fields")
    p.add_argument("--kind", choices=bench.KINDS)
    p.add_argument("--policies", help="comma separated policy names, e.g. fixed,std/10/2,rel/1.2/auto")
    p.add_argument("--lambdas", help="list a,b,c or log grid lo:hi:n")
    p.add_argument("--xis", help="list a,b,c (or 'heuristic') or log grid lo:hi:n")
    p.add_argument("--rho0s", help="list or log grid; multiples of lambda unless --rho0-absolute")
    p.add_argument("--rho0-absolute", dest="rho0_relative", action="store_false", default=None)
    p.add_argument("--eps-abs", type=float)
    p.add_argument("--eps-rel", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--period", type=int)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--sparsity", type=int)
    p.add_argument("--noise-sd", type=float)
    p.add_argument("--dict-sd", type=float)
    p.add_argument("--dictionary", help="dictionary matrix file (CSV or binary)")
    p.add_argument("--signal", help="signal matrix file (CSV or binary)")
    p.add_argument("--images", help="comma separated PGM files")
    p.add_argument("--image-size", type=int)
    p.add_argument("--num-filters", type=int)
    p.add_argument("--filter-size", type=int)
    p.add_argument("--lambda-L", dest="lambda_L", type=float)
    p.add_argument("-o", "--output", help="output CSV (default stdout)")


_SPEC_FIELDS = {f.name for f in dataclasses.fields(bench.ExperimentSpec)}


def spec_from_args(args):
    d = {}
    if args.config:
        with open(args.config) as fh:
            d.update(json.load(fh))
    for name, val in vars(args).items():
        if name in _SPEC_FIELDS and val is not None:
            d[name] = val
    return bench.ExperimentSpec.from_dict(d)


def cmd_sweep(args):
    spec = spec_from_args(args)
    text = bench.run_sweep(spec, out=spec.output)
    if spec.output is None:
        sys.stdout.write(text)
    return 0


def cmd_aggregate(args):
    out = args.output if args.output else sys.stdout
    bench.aggregate(args.input, out=out)
    return 0


def cmd_verify_scaling(args):
    rng = np.random.default_rng(args.seed)
    D = rng.standard_normal((args.N, args.M))
    sigma = rng.standard_normal(args.N)
    problem = BpdnProblem(D, sigma, args.lmbda)
    if args.delta is not None:
        t = GraphFormScaling(args.alpha, args.gamma, args.delta)
    else:
        t = ScalingTriple(args.alpha, args.beta, args.gamma)
    penalty = None if args.policy == "fixed" else bench.parse_policy(args.policy, period=1)
    rep = verify_equivariance(problem, t, k_max=args.k_max, rho0=args.rho0,
                              penalty=penalty, tol=args.tol)
    if args.csv:
        with open(args.csv, "w") as fh:
            rep.write_csv(fh)
    print(rep.summary())
    return 0 if rep.passed else 1


def cmd_recover(args):
    problem, x_true = assemble_random_recovery(
        args.seed, args.N, args.M, args.sparsity, args.noise_sd,
        dict_sd=args.dict_sd, lmbda=args.lmbda)
    stop = StoppingConfig(eps_abs=args.eps_abs, eps_rel=args.eps_rel, max_iter=args.max_iter)
    print(f"N={args.N} M={args.M} nonzeros={args.sparsity} lambda={problem.lmbda:.4g} "
          f"rho0={args.rho0:g} period={args.period}")
    writer = None
    if args.trace_csv:
        fh = open(args.trace_csv, "w")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["policy", "k", "rho", "fval", "r", "s", "r_rel", "s_rel",
                         "eps_pri", "eps_dua", "tau", "decision"])
    for name in args.policies.split(","):
        cfg = bench.parse_policy(name, tau_max=args.tau_max, period=args.period)
        tr = run(problem, penalty=cfg, stop=stop, rho0=args.rho0)
        err = np.linalg.norm(tr.state.z - x_true) / np.linalg.norm(x_true)
        status = "converged" if tr.converged else "capped"
        print(f"{name:>14s}: {tr.iterations:5d} iterations ({status}), "
              f"final rho {tr.records[-1].rho:.3g}, relative error {err:.3g}")
        if writer is not None:
            for r in tr.records:
                writer.writerow([name, r.k, repr(r.rho), repr(r.fval), repr(r.r_norm),
                                 repr(r.s_norm), repr(r.r_rel), repr(r.s_rel),
                                 repr(r.eps_pri), repr(r.eps_dua), repr(r.tau), r.decision])
    if writer is not None:
        fh.close()
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="rbadmm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    _add_sweep_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("aggregate", help="mean/sd of iterations over rho0")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("verify-scaling", help="check iterate equivariance under scaling")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, help="use graph-form scaling (alpha, gamma, delta)")
    p.add_argument("--k-max", type=int, default=100)
    p.add_argument("--rho0", type=float, default=1.0)
    p.add_argument("--policy", default="fixed")
    p.add_argument("--lambda", dest="lmbda", type=float, default=0.2)
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--M", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--csv", help="write (relation, k, deviation) rows here")
    p.set_defaults(func=cmd_verify_scaling)

    p = sub.add_parser("recover", help="random-dictionary sparse recovery experiment")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--M", type=int, default=1024)
    p.add_argument("--sparsity", type=int, default=16)
    p.add_argument("--noise-sd", type=float, default=0.5)
    p.add_argument("--dict-sd", type=float, default=1.0)
    p.add_argument("--lambda", dest="lmbda", type=float)
    p.add_argument("--rho0", type=float, default=1.0)
    p.add_argument("--eps-abs", type=float, default=0.0)
    p.add_argument("--eps-rel", type=float, default=1e-4)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--period", type=int, default=10)
    p.add_argument("--tau-max", type=float, default=100.0)
    p.add_argument("--policies", default="fixed,std/10/2,rel/10/2,rel/10/auto")
    p.add_argument("--trace-csv", help="write per-iteration statistics here")
    p.set_defaults(func=cmd_recover)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, bench.SweepFormatError, FormatError, OSError) as e:
        print(f"rbadmm: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
