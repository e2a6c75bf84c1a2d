"""Random-dictionary sparse recovery: iterations to converge per policy.

Runs each policy from a range of initial penalties on several random
instances and prints the iteration counts.

    python scripts/recover_random.py --seeds 3 --rho0s 0.1,1,10,100
"""

import argparse

import numpy as np

from rbadmm import StoppingConfig, assemble_random_recovery, run
from rbadmm.bench import parse_policy, parse_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--M", type=int, default=1024)
    ap.add_argument("--sparsity", type=int, default=16)
    ap.add_argument("--rho0s", default="0.1,1,10,100")
    ap.add_argument("--policies", default="fixed,std/10/2,std/10/auto,rel/10/2,rel/10/auto")
    ap.add_argument("--period", type=int, default=10)
    ap.add_argument("--max-iter", type=int, default=1000)
    args = ap.parse_args()

    stop = StoppingConfig(eps_abs=0.0, eps_rel=1e-4, max_iter=args.max_iter)
    rho0s = parse_grid(args.rho0s)
    policies = args.policies.split(",")
    print("seed  rho0    " + "".join(f"{p:>13s}" for p in policies))
    totals = {p: [] for p in policies}
    for seed in range(args.seeds):
        problem, x_true = assemble_random_recovery(seed, args.N, args.M, args.sparsity)
        for rho0 in rho0s:
            cells = []
            for name in policies:
                tr = run(problem, penalty=parse_policy(name, period=args.period),
                         stop=stop, rho0=rho0)
                totals[name].append(tr.iterations)
                cells.append(f"{tr.iterations:>12d}{'' if tr.converged else '*'}")
            print(f"{seed:4d}  {rho0:<7g} " + "".join(f"{c:>13s}" for c in cells))
    print("mean        " + "".join(f"{np.mean(v):>13.1f}" for v in totals.values()))
    print("(* = iteration limit reached)")


if __name__ == "__main__":
    main()
