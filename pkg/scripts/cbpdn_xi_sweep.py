"""CBPDN sweep of the relative-residual policy over lambda and xi.

Uses two highpass-filtered image crops (the scikit-image camera image
if available, else synthetic images) and random zero-mean filters.
Prints the mean iterations over rho0 for each (lambda, xi), marking the
best xi per lambda alongside the value from ``xi_heuristic``.

    python scripts/cbpdn_xi_sweep.py --size 64 --out results/
"""

import argparse
import os

import numpy as np

from rbadmm.bench import ExperimentSpec, aggregate, log_grid, run_sweep
from rbadmm.io import write_pgm
from rbadmm.penalty import xi_heuristic


def camera_crops(size, out):
    try:
        from skimage import data
    except ImportError:
        return ()
    img = data.camera()
    paths = []
    for i, (r, c) in enumerate([(100, 180), (300, 250)]):
        path = os.path.join(out, f"camera_{i}.pgm")
        write_pgm(path, img[r:r + size, c:c + size])
        paths.append(path)
    return tuple(paths)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--filters", type=int, default=16)
    ap.add_argument("--max-iter", type=int, default=500)
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    spec = ExperimentSpec(
        kind="cbpdn", images=camera_crops(args.size, args.out), image_size=args.size,
        num_filters=args.filters, filter_size=8, policies=("rel/10/auto",),
        lambdas=log_grid(1e-3, 0.3, 6), xis=log_grid(0.3, 10, 7) + ("heuristic",),
        rho0s=log_grid(0.1, 1e4, 6), max_iter=args.max_iter,
        output=os.path.join(args.out, "cbpdn_sweep.csv"))
    run_sweep(spec)
    summary = aggregate(spec.output, out=os.path.join(args.out, "cbpdn_summary.csv"))

    xis = [x for x in spec.xis if x != "heuristic"]
    print(f"{'lambda':>8s}" + "".join(f"{x:>8.2f}" for x in xis) + "   best xi  heuristic (its)")
    for lm in spec.lambdas:
        row = {r["xi"]: r["mean_iterations"] for r in summary if r["lambda"] == lm}
        its = [row[repr(x)] for x in xis]
        best = xis[int(np.argmin(its))]
        print(f"{lm:8.3g}" + "".join(f"{v:8.1f}" for v in its)
              + f"   {best:7.2f}  {xi_heuristic(lm):5.2f} ({row['heuristic']:.1f})")


if __name__ == "__main__":
    main()
