"""Desk-scale MMV BPDN sweep over policies, lambda and initial rho.

Writes the raw sweep and its summary as CSV and prints the mean
iteration count of each policy, averaged over rho0 and then lambda.

    RBADMM_WORKERS=4 python scripts/bpdn_sweep.py --out results/
"""

import argparse
import os

from rbadmm.bench import ExperimentSpec, aggregate, mean_over_lambda, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--K", type=int, default=32, help="number of signals")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rho0-points", type=int, default=11)
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    spec = ExperimentSpec.from_dict(dict(
        kind="bpdn-random", N=64, M=128, K=args.K, sparsity=8, seed=args.seed,
        rho0s=f"0.1:1e4:{args.rho0_points}",
        output=os.path.join(args.out, "bpdn_sweep.csv")))
    run_sweep(spec)
    summary = aggregate(spec.output, out=os.path.join(args.out, "bpdn_summary.csv"))

    print(f"{'policy':>14s}  mean iterations")
    for policy in spec.policies + ("fixed (min)",):
        print(f"{policy:>14s}  {mean_over_lambda(summary, policy):8.1f}")
    print("\nper lambda:")
    lambdas = sorted({r["lambda"] for r in summary})
    print(f"{'policy':>14s}" + "".join(f"{lm:>10.3g}" for lm in lambdas))
    for policy in spec.policies + ("fixed (min)",):
        row = {r["lambda"]: r["mean_iterations"] for r in summary if r["policy"] == policy}
        print(f"{policy:>14s}" + "".join(f"{row[lm]:>10.1f}" for lm in lambdas))


if __name__ == "__main__":
    main()
