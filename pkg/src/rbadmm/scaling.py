"""Problem scaling and equivariance checks for ADMM iterates.

A problem P scaled by (alpha, beta, gamma) is

    argmin alpha f(gamma x) + alpha g(gamma z)
    s.t.   beta gamma A x + beta gamma B z = beta c

For a graph-form problem (B = -I, c = 0) the family is instead
parameterised by (alpha, gamma, delta):

    argmin alpha f(gamma x) + alpha g(delta z)  s.t.  (gamma/delta) A x = z

With matched initial iterates and penalty parameter, the ADMM iterates
of the scaled problem are fixed multiples of those of the original.
:func:`verify_equivariance` runs both problems side by side and
measures how closely each of these relations holds.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from rbadmm.convergence import StoppingConfig
from rbadmm.core import ProblemInstance, SolverState, initial_state, steps
from rbadmm.errors import ConfigurationError
from rbadmm.penalty import PenaltyConfig

RELATIONS = ("x", "z", "y", "r", "s", "rel")


def _positive(**kw):
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise ConfigurationError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class ScalingTriple:
    """Objective scale alpha, constraint scale beta, variable scale gamma."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        _positive(alpha=self.alpha, beta=self.beta, gamma=self.gamma)

    @property
    def rho_factor(self):
        return self.alpha / self.beta ** 2

    def factors(self):
        """Multipliers relating scaled to unscaled x, z, y, r and s."""
        a, b, g = self.alpha, self.beta, self.gamma
        return {"x": 1 / g, "z": 1 / g, "y": a / b, "r": b, "s": a * g}


@dataclass(frozen=True)
class GraphFormScaling:
    """Graph-form scaling: objective alpha, x-scale gamma, z-scale delta."""

    alpha: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        _positive(alpha=self.alpha, gamma=self.gamma, delta=self.delta)

    @property
    def rho_factor(self):
        return self.alpha * self.delta ** 2

    def factors(self):
        a, g, d = self.alpha, self.gamma, self.delta
        return {"x": 1 / g, "z": 1 / d, "y": a * d, "r": 1 / d, "s": a * g}


Scaling = Union[ScalingTriple, GraphFormScaling]


class ScaledProblem(ProblemInstance):
    """A problem scaled by a :class:`ScalingTriple`.

    The subproblem solvers map their arguments back to the original
    problem, call its solvers, and map the result forward again.
    """

    def __init__(self, base: ProblemInstance, t: ScalingTriple):
        self.base = copy.copy(base)
        self.scaling = t
        self.x_shape = base.x_shape
        self.z_shape = base.z_shape
        self.c = t.beta * base.c

    def _rho(self, rho):
        return rho / self.scaling.rho_factor

    def solve_x(self, z, u, rho):
        t = self.scaling
        x = self.base.solve_x(t.gamma * z, u / t.beta, self._rho(rho))
        return x / t.gamma

    def solve_z(self, x, u, rho):
        t = self.scaling
        z = self.base.solve_z(t.gamma * x, u / t.beta, self._rho(rho))
        return z / t.gamma

    def A(self, x):
        t = self.scaling
        return (t.beta * t.gamma) * self.base.A(x)

    def AT(self, w):
        t = self.scaling
        return (t.beta * t.gamma) * self.base.AT(w)

    def B(self, z):
        t = self.scaling
        return (t.beta * t.gamma) * self.base.B(z)

    def f(self, x):
        return self.scaling.alpha * self.base.f(self.scaling.gamma * x)

    def g(self, z):
        return self.scaling.alpha * self.base.g(self.scaling.gamma * z)

    def rho_changed(self, rho):
        self.base.rho_changed(self._rho(rho))


class GraphScaledProblem(ProblemInstance):
    """A graph-form problem scaled by a :class:`GraphFormScaling`."""

    def __init__(self, base: ProblemInstance, t: GraphFormScaling):
        if np.any(base.c != 0):
            raise ConfigurationError("graph-form scaling requires c = 0")
        self.base = copy.copy(base)
        self.scaling = t
        self.x_shape = base.x_shape
        self.z_shape = base.z_shape
        self.c = base.c

    def _rho(self, rho):
        return rho / self.scaling.rho_factor

    def solve_x(self, z, u, rho):
        t = self.scaling
        x = self.base.solve_x(t.delta * z, t.delta * u, self._rho(rho))
        return x / t.gamma

    def solve_z(self, x, u, rho):
        t = self.scaling
        z = self.base.solve_z(t.gamma * x, t.delta * u, self._rho(rho))
        return z / t.delta

    def A(self, x):
        t = self.scaling
        return (t.gamma / t.delta) * self.base.A(x)

    def AT(self, w):
        t = self.scaling
        return (t.gamma / t.delta) * self.base.AT(w)

    def B(self, z):
        return self.base.B(z)

    def f(self, x):
        return self.scaling.alpha * self.base.f(self.scaling.gamma * x)

    def g(self, z):
        return self.scaling.alpha * self.base.g(self.scaling.delta * z)

    def rho_changed(self, rho):
        self.base.rho_changed(self._rho(rho))


def scale_problem(problem: ProblemInstance, t: Scaling) -> ProblemInstance:
    """Wrap ``problem`` as its scaled companion."""
    if isinstance(t, GraphFormScaling):
        return GraphScaledProblem(problem, t)
    if isinstance(t, ScalingTriple):
        return ScaledProblem(problem, t)
    raise ConfigurationError(f"unsupported scaling {t!r}")


def scaled_rho(rho, t: Scaling):
    """Penalty parameter giving equivariant iterates for the scaled problem."""
    return rho * t.rho_factor


def scale_iterates(state: SolverState, t: Scaling) -> SolverState:
    """Map iterates of the original problem to the scaled problem."""
    fac = t.factors()
    rho_t = scaled_rho(state.rho, t)
    y_t = fac["y"] * state.y
    return SolverState(
        x=fac["x"] * state.x,
        z=fac["z"] * state.z,
        z_prev=fac["z"] * state.z_prev,
        u=y_t / rho_t,
        rho=rho_t,
        k=state.k,
    )


def scale_penalty(cfg: PenaltyConfig, t: Scaling) -> PenaltyConfig:
    """Penalty configuration to pair with the scaled problem.

    The rho clamps are rescaled like rho. For ``xi_balance`` the target
    ratio is multiplied by the ratio of the primal and dual residual
    scale factors, which keeps the decision sequence unchanged. (For a
    :class:`ScalingTriple` that factor is ``1 / xi_for_scaling``: the
    compensating ratio ``xi_for_scaling`` applied to the original
    problem reproduces ``standard_balance`` on the scaled one.)
    """
    fac = t.factors()
    kw = dict(rho_min=cfg.rho_min * t.rho_factor, rho_max=cfg.rho_max * t.rho_factor)
    if cfg.variant == "xi_balance":
        kw["xi"] = cfg.xi * fac["r"] / fac["s"]
    return dataclasses.replace(cfg, **kw)


def _rel_dev(a, b, ref=None):
    """||a - b|| / (||ref|| + 1e-30), with ``ref`` defaulting to ``b``."""
    ref = b if ref is None else ref
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / (
        float(np.linalg.norm(ref)) + 1e-30)


@dataclass
class VerificationReport:
    """Per-iteration deviations of the scaling relations.

    ``deviations[relation]`` lists the relative deviation at each
    iteration. For x, z and y it is taken against the norm of the
    (scaled) reference iterate. The residuals r and s are differences
    of iterate terms, and near convergence they carry rounding error
    proportional to those terms rather than to themselves, so their
    deviations are taken against the norm of the terms they are formed
    from: max{||Ax||, ||Bz||, ||c||} for r and rho max{||A^T B z||,
    ||A^T B z_prev||} for s. The ``rel`` entry is the larger absolute
    difference of the (dimensionless) relative residual norms.
    ``self_deviations`` holds the r, s and rel deviations measured
    against their own magnitudes, for information.

    ``first_decision_mismatch`` is ``(k, tag, scaled_tag)`` for the
    first penalty decision that differs between the runs, and
    ``first_stop_mismatch`` the first k at which the stopping tests
    disagree.
    """

    scaling: Scaling
    tol: float
    deviations: dict = field(default_factory=lambda: {r: [] for r in RELATIONS})
    self_deviations: dict = field(default_factory=lambda: {r: [] for r in RELATIONS[3:]})
    decisions: list = field(default_factory=list)
    scaled_decisions: list = field(default_factory=list)
    stops: list = field(default_factory=list)
    scaled_stops: list = field(default_factory=list)
    first_decision_mismatch: Optional[tuple] = None
    first_stop_mismatch: Optional[int] = None

    @property
    def iterations(self):
        return len(self.deviations["x"])

    def max_deviation(self, relation):
        d = self.deviations[relation]
        return max(d) if d else 0.0

    def max_self_deviation(self, relation):
        d = self.self_deviations[relation]
        return max(d) if d else 0.0

    def failures(self):
        """``(relation, k, deviation)`` for the first violation of each relation."""
        out = []
        for rel in RELATIONS:
            for k, d in enumerate(self.deviations[rel], start=1):
                if not d <= self.tol:
                    out.append((rel, k, d))
                    break
        return out

    @property
    def passed(self):
        return (not self.failures() and self.first_decision_mismatch is None
                and self.first_stop_mismatch is None)

    def rows(self):
        for rel in RELATIONS:
            for k, d in enumerate(self.deviations[rel], start=1):
                yield rel, k, d

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["relation", "k", "deviation"])
        for rel, k, d in self.rows():
            w.writerow([rel, k, repr(d)])

    def summary(self):
        lines = []
        for rel in RELATIONS:
            line = f"{rel:>4s}: max deviation {self.max_deviation(rel):.3e}"
            if rel in self.self_deviations:
                line += f" (against own magnitude {self.max_self_deviation(rel):.3e})"
            lines.append(line)
        if self.first_decision_mismatch is not None:
            k, a, b = self.first_decision_mismatch
            lines.append(f"first rho decision mismatch at k={k}: {a} vs {b}")
        if self.first_stop_mismatch is not None:
            lines.append(f"first stopping mismatch at k={self.first_stop_mismatch}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def verify_equivariance(problem: ProblemInstance, t: Scaling, k_max=100, rho0=1.0,
                        penalty: Optional[PenaltyConfig] = None,
                        init: Optional[SolverState] = None,
                        stop: Optional[StoppingConfig] = None,
                        tol=1e-9, halt=False) -> VerificationReport:
    """Run ``problem`` and its scaled companion in lockstep.

    The stopping test given by ``stop`` (default: relative mode,
    eps_abs = 0, eps_rel = 1e-3) is evaluated at every iteration and
    compared between the runs. With ``halt=False`` both runs perform
    exactly ``k_max`` iterations; otherwise they end at the first
    iteration where either stopping test holds.
    """
    penalty = PenaltyConfig.fixed() if penalty is None else penalty
    stop = StoppingConfig() if stop is None else stop
    stop = dataclasses.replace(stop, max_iter=k_max)
    init = initial_state(problem, rho0) if init is None else init
    scaled = scale_problem(problem, t)
    fac = t.factors()

    report = VerificationReport(scaling=t, tol=tol)
    dev, sdev = report.deviations, report.self_deviations
    run_a = steps(problem, init, penalty, stop, halt=False)
    run_b = steps(scaled, scale_iterates(init, t), scale_penalty(penalty, t), stop,
                  halt=False)
    for (sa, ra, da), (sb, rb, db) in zip(run_a, run_b):
        dev["x"].append(_rel_dev(sb.x, fac["x"] * sa.x))
        dev["z"].append(_rel_dev(sb.z, fac["z"] * sa.z))
        dev["y"].append(_rel_dev(sb.y, fac["y"] * sa.y))
        s_terms = sa.rho * max(np.linalg.norm(problem.AT(problem.B(sa.z))),
                               np.linalg.norm(problem.AT(problem.B(sa.z_prev))))
        dev["r"].append(_rel_dev(rb.r, fac["r"] * ra.r, fac["r"] * ra.r_nrm_factor))
        dev["s"].append(_rel_dev(rb.s, fac["s"] * ra.s, fac["s"] * s_terms))
        dev["rel"].append(max(abs(rb.r_rel_norm - ra.r_rel_norm),
                              abs(rb.s_rel_norm - ra.s_rel_norm)))
        sdev["r"].append(_rel_dev(rb.r, fac["r"] * ra.r))
        sdev["s"].append(_rel_dev(rb.s, fac["s"] * ra.s))
        sdev["rel"].append(max(_rel_dev(rb.r_rel_norm, ra.r_rel_norm),
                               _rel_dev(rb.s_rel_norm, ra.s_rel_norm)))
        tag_a = "none" if da is None else da.tag
        tag_b = "none" if db is None else db.tag
        report.decisions.append(tag_a)
        report.scaled_decisions.append(tag_b)
        if tag_a != tag_b and report.first_decision_mismatch is None:
            report.first_decision_mismatch = (sa.k, tag_a, tag_b)
        report.stops.append(ra.converged)
        report.scaled_stops.append(rb.converged)
        if ra.converged != rb.converged and report.first_stop_mismatch is None:
            report.first_stop_mismatch = sa.k
        if halt and (ra.converged or rb.converged):
            break
    return report
