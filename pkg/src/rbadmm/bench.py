"""Parameter sweeps over penalty policies, lambda, xi and initial rho.

A sweep evaluates every cell of the grid policies x lambda x xi x rho0
and writes one CSV row per cell. :func:`aggregate` reduces a sweep to
mean and standard deviation of the iteration count over rho0.

Policies are named by strings:

    fixed            rho held at rho0
    std/MU/TAU       standard residuals, target ratio 1
    xi/MU/TAU        standard residuals, target ratio xi
    rel/MU/TAU       relative residuals, target ratio xi

where TAU is a number or ``auto`` for the adaptive multiplier.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from rbadmm.bpdn import BpdnProblem, assemble_random_recovery
from rbadmm.cbpdn import CbpdnProblem, highpass_preprocess, random_filters
from rbadmm.convergence import StoppingConfig
from rbadmm.core import run
from rbadmm.errors import ConfigurationError
from rbadmm.io import load_image, read_matrix
from rbadmm.penalty import PenaltyConfig, xi_heuristic

SCHEMA = "# rbadmm-sweep schema 1"
COLUMNS = ("policy", "residual_flavor", "lambda", "xi", "rho0", "iterations",
           "capped", "final_fval", "final_r_rel", "final_s_rel", "final_r",
           "final_s", "error", "wall_time")
SUMMARY_SCHEMA = "# rbadmm-summary schema 1"
SUMMARY_COLUMNS = ("policy", "residual_flavor", "lambda", "xi", "n",
                   "mean_iterations", "sd_iterations", "min_iterations",
                   "max_iterations", "capped")
KINDS = ("bpdn-random", "bpdn-file", "cbpdn")
WORKERS_ENV = "RBADMM_WORKERS"

_FLAVORS = {"std": "standard_balance", "xi": "xi_balance", "rel": "relative_balance"}


class SweepFormatError(ValueError):
    pass


def log_grid(lo, hi, n):
    """``n`` logarithmically spaced values from ``lo`` to ``hi``."""
    if not (lo > 0 and hi > 0):
        raise ConfigurationError("log-spaced grid endpoints must be positive")
    if n < 1:
        raise ConfigurationError("grid must be non-empty")
    if n == 1:
        return (float(lo),)
    return tuple(float(v) for v in np.logspace(np.log10(lo), np.log10(hi), n))


def parse_grid(text):
    """Parse ``a,b,c`` as a list or ``lo:hi:n`` as a log-spaced grid."""
    text = str(text).strip()
    if ":" in text:
        lo, hi, n = text.split(":")
        return log_grid(float(lo), float(hi), int(n))
    return tuple(v if v == "heuristic" else float(v)
                 for v in (s.strip() for s in text.split(",")) if v)


def parse_policy(name, mu_default=10.0, tau_max=100.0, period=10):
    """Translate a policy name into a :class:`PenaltyConfig`.

    The xi of the returned configuration is a placeholder; the sweep
    sets it per cell.
    """
    if name == "fixed":
        return PenaltyConfig.fixed(period=period)
    parts = name.split("/")
    if len(parts) != 3 or parts[0] not in _FLAVORS:
        raise ConfigurationError(f"bad policy name {name!r}")
    try:
        mu = float(parts[1]) if parts[1] else mu_default
        if parts[2] == "auto":
            kw = dict(tau_mode="adaptive", tau_max=tau_max, tau=min(2.0, tau_max))
        else:
            tau = float(parts[2])
            kw = dict(tau_mode="fixed", tau=tau, tau_max=max(tau, tau_max))
    except ValueError:
        raise ConfigurationError(f"bad policy name {name!r}") from None
    return PenaltyConfig(variant=_FLAVORS[parts[0]], mu=mu, period=period, **kw)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that defines a sweep.

    ``rho0`` values are multiplied by lambda when ``rho0_relative`` is
    set. A ``xis`` entry of ``"heuristic"`` selects xi from lambda by
    :func:`rbadmm.penalty.xi_heuristic`. ``period`` defaults to 10 for
    BPDN and 1 for CBPDN.
    """

    kind: str = "bpdn-random"
    policies: Tuple[str, ...] = ("fixed", "std/10/2", "std/10/auto", "rel/10/2",
                                 "rel/10/auto", "rel/1.2/auto")
    lambdas: Tuple[float, ...] = log_grid(1e-3, 0.3, 6)
    xis: Tuple = (1.0,)
    rho0s: Tuple[float, ...] = log_grid(0.1, 1e4, 11)
    rho0_relative: bool = True
    eps_abs: float = 0.0
    eps_rel: float = 1e-3
    max_iter: int = 500
    period: Optional[int] = None
    tau_max: float = 100.0
    seed: int = 0
    # bpdn-random
    N: int = 64
    M: int = 128
    K: int = 1
    sparsity: int = 8
    noise_sd: float = 0.5
    dict_sd: float = 1.0
    # bpdn-file
    dictionary: Optional[str] = None
    signal: Optional[str] = None
    # cbpdn
    images: Tuple[str, ...] = ()
    image_size: int = 64
    num_filters: int = 16
    filter_size: int = 8
    lambda_L: float = 5.0
    output: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown problem kind {self.kind!r}")
        for name in ("policies", "lambdas", "xis", "rho0s"):
            if len(getattr(self, name)) == 0:
                raise ConfigurationError(f"{name} grid is empty")
        if any(not v > 0 for v in self.lambdas):
            raise ConfigurationError("lambda values must be positive")
        if any(not v > 0 for v in self.rho0s):
            raise ConfigurationError("rho0 values must be positive")
        if any(v != "heuristic" and not v > 0 for v in self.xis):
            raise ConfigurationError("xi values must be positive or 'heuristic'")
        if self.kind == "bpdn-file" and not (self.dictionary and self.signal):
            raise ConfigurationError("bpdn-file requires dictionary and signal paths")
        for p in (self.dictionary, self.signal, *self.images):
            if p is not None and not os.path.isfile(p):
                raise ConfigurationError(f"input file not found: {p}")
        StoppingConfig(self.eps_abs, self.eps_rel, self.max_iter)
        for name in self.policies:
            parse_policy(name)

    @property
    def effective_period(self):
        if self.period is not None:
            return self.period
        return 1 if self.kind == "cbpdn" else 10

    @property
    def stopping(self):
        return StoppingConfig(eps_abs=self.eps_abs, eps_rel=self.eps_rel,
                              max_iter=self.max_iter)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ConfigurationError(f"unknown spec fields: {sorted(unknown)}")
        for key in ("policies", "images"):
            if key in d and isinstance(d[key], str):
                d[key] = tuple(s.strip() for s in d[key].split(",") if s.strip())
        for key in ("lambdas", "xis", "rho0s"):
            if key in d:
                d[key] = parse_grid(d[key]) if isinstance(d[key], str) else tuple(d[key])
        if "policies" in d:
            d["policies"] = tuple(d["policies"])
        if "images" in d:
            d["images"] = tuple(d["images"])
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def cells(self):
        """Grid cells in output order: (policy, lambda, xi, rho0)."""
        for policy in self.policies:
            for lmbda in self.lambdas:
                for xi in self.xis:
                    for rho0 in self.rho0s:
                        yield policy, lmbda, xi, rho0


def synthetic_image(size, seed=0):
    """Deterministic piecewise-smooth test image with values in [0, 1]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size] / size
    img = 0.3 + 0.2 * np.sin(2 * np.pi * (xx + 0.5 * yy))
    for _ in range(8):
        cx, cy, r = rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.2)
        img[(xx - cx) ** 2 + (yy - cy) ** 2 < r ** 2] += rng.uniform(-0.3, 0.3)
    for _ in range(4):
        x0, y0 = rng.uniform(0, 0.8, size=2)
        w, h = rng.uniform(0.05, 0.3, size=2)
        img[(xx > x0) & (xx < x0 + w) & (yy > y0) & (yy < y0 + h)] += rng.uniform(-0.3, 0.3)
    img += 0.02 * rng.standard_normal(img.shape)
    return np.clip(img, 0, 1)


@functools.lru_cache(maxsize=8)
def build_problem(spec: ExperimentSpec, lmbda: float):
    """Problem instance for one lambda value (cached per process)."""
    if spec.kind == "bpdn-random":
        if spec.K == 1:
            problem, _ = assemble_random_recovery(
                spec.seed, spec.N, spec.M, spec.sparsity, spec.noise_sd,
                dict_sd=spec.dict_sd, lmbda=lmbda)
            return problem
        rng = np.random.default_rng(spec.seed)
        D = spec.dict_sd * rng.standard_normal((spec.N, spec.M))
        X = np.zeros((spec.M, spec.K))
        for k in range(spec.K):
            idx = rng.choice(spec.M, size=spec.sparsity, replace=False)
            X[idx, k] = rng.standard_normal(spec.sparsity)
        S = D @ X + spec.noise_sd * rng.standard_normal((spec.N, spec.K))
        return BpdnProblem(D, S, lmbda)
    if spec.kind == "bpdn-file":
        D = read_matrix(spec.dictionary)
        S = read_matrix(spec.signal)
        if S.shape[1] == 1:
            S = S[:, 0]
        return BpdnProblem(D, S, lmbda)
    if spec.images:
        imgs = np.stack([load_image(p) for p in spec.images])
    else:
        imgs = np.stack([synthetic_image(spec.image_size, spec.seed + i) for i in range(2)])
    _, high = highpass_preprocess(imgs, spec.lambda_L)
    filters = random_filters(spec.num_filters, spec.filter_size, spec.seed)
    return CbpdnProblem(filters, high, lmbda)


def run_cell(spec: ExperimentSpec, cell):
    """Run one grid cell and return its CSV row as a dict."""
    policy, lmbda, xi, rho0 = cell
    xi_val = xi_heuristic(lmbda) if xi == "heuristic" else float(xi)
    rho = rho0 * lmbda if spec.rho0_relative else rho0
    row = dict(policy=policy, lambda_=lmbda, xi=xi, rho0=rho)
    t0 = time.perf_counter()
    try:
        cfg = parse_policy(policy, tau_max=spec.tau_max, period=spec.effective_period)
        cfg = cfg.replace(xi=xi_val)
        row["residual_flavor"] = cfg.residual_flavor
        problem = build_problem(spec, lmbda)
        trace = run(problem, penalty=cfg, stop=spec.stopping, rho0=rho)
        last = trace.records[-1]
        row.update(iterations=trace.iterations, capped=int(not trace.converged),
                   final_fval=last.fval, final_r_rel=last.r_rel, final_s_rel=last.s_rel,
                   final_r=last.r_norm, final_s=last.s_norm, error="")
    except Exception as e:  # recorded in-row; a failed cell never aborts the sweep
        row.setdefault("residual_flavor", "")
        row.update(iterations="", capped="", final_fval="", final_r_rel="",
                   final_s_rel="", final_r="", final_s="",
                   error=f"{type(e).__name__}: {e}".replace("\n", " "))
    row["wall_time"] = time.perf_counter() - t0
    return row


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row_values(row):
    return [_fmt(row["lambda_" if c == "lambda" else c]) for c in COLUMNS]


def run_sweep(spec: ExperimentSpec, out=None, workers=None):
    """Run every cell of ``spec`` and write the CSV to ``out``.

    ``out`` is a path or text stream; if None, ``spec.output`` is used,
    and if that is None too the CSV text is returned. ``workers``
    defaults to the ``RBADMM_WORKERS`` environment variable (1 if
    unset). Rows are written in grid order regardless of completion
    order.
    """
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    cells = list(spec.cells())
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(run_cell, [spec] * len(cells), cells))
    else:
        rows = [run_cell(spec, c) for c in cells]

    buf = io.StringIO()
    buf.write(SCHEMA + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(_row_values(row))
    text = buf.getvalue()

    out = spec.output if out is None else out
    if out is None:
        return text
    if hasattr(out, "write"):
        out.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
    return text


def read_sweep(source):
    """Parse sweep CSV from a path or text stream into a list of dicts."""
    if hasattr(source, "read"):
        lines = source.read().splitlines()
        name = getattr(source, "name", "<stream>")
    else:
        with open(source) as fh:
            lines = fh.read().splitlines()
        name = source
    rows = []
    header = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = next(csv.reader([line]))
        if header is None:
            missing = [c for c in COLUMNS if c not in fields]
            if missing:
                raise SweepFormatError(f"{name}:{lineno}: header missing columns {missing}")
            header = fields
            continue
        if len(fields) != len(header):
            raise SweepFormatError(
                f"{name}:{lineno}: expected {len(header)} fields, got {len(fields)}")
        rec = dict(zip(header, fields))
        try:
            rec["lambda"] = float(rec["lambda"])
            rec["rho0"] = float(rec["rho0"])
            if rec["error"] == "":
                rec["iterations"] = int(rec["iterations"])
                rec["capped"] = int(rec["capped"])
        except ValueError as e:
            raise SweepFormatError(f"{name}:{lineno}: {e}") from None
        rec["lineno"] = lineno
        rows.append(rec)
    if header is None:
        raise SweepFormatError(f"{name}: no header row")
    return rows


def aggregate(source, out=None):
    """Summarise a sweep over rho0.

    One output row per (policy, lambda, xi) with the mean, population
    standard deviation, minimum and maximum of the iteration count and
    the number of capped cells. For the ``fixed`` policy an extra
    ``fixed (min)`` row carries the best fixed-rho iteration count.
    Cells that failed are excluded. Returns the list of summary dicts
    and writes CSV to ``out`` if given.
    """
    rows = read_sweep(source)
    groups = {}
    for r in rows:
        if r["error"]:
            continue
        key = (r["policy"], r["lambda"], r["xi"])
        groups.setdefault(key, []).append(r)

    summary = []
    for (policy, lmbda, xi), grp in groups.items():
        its = [r["iterations"] for r in grp]
        rec = dict(policy=policy, residual_flavor=grp[0]["residual_flavor"],
                   **{"lambda": lmbda}, xi=xi, n=len(its),
                   mean_iterations=statistics.fmean(its),
                   sd_iterations=statistics.pstdev(its),
                   min_iterations=min(its), max_iterations=max(its),
                   capped=sum(r["capped"] for r in grp))
        summary.append(rec)
        if policy == "fixed":
            summary.append(dict(rec, policy="fixed (min)", n=1,
                                mean_iterations=float(min(its)), sd_iterations=0.0,
                                max_iterations=min(its),
                                capped=int(rec["capped"] == len(its))))

    if out is not None:
        buf = io.StringIO()
        buf.write(SUMMARY_SCHEMA + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for rec in summary:
            w.writerow([_fmt(rec[c]) for c in SUMMARY_COLUMNS])
        if hasattr(out, "write"):
            out.write(buf.getvalue())
        else:
            with open(out, "w") as fh:
                fh.write(buf.getvalue())
    return summary


def mean_over_lambda(summary, policy, xi=None):
    """Mean over the lambda grid of a policy's mean iteration count."""
    vals = [r["mean_iterations"] for r in summary
            if r["policy"] == policy and (xi is None or r["xi"] == xi)]
    if not vals:
        raise KeyError(policy)
    return statistics.fmean(vals)
