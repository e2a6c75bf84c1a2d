"""Generic scaled-form ADMM engine.

Solves problems of the form

    argmin_{x, z} f(x) + g(z)  such that  A x + B z = c

via the iterations

    x <- argmin_x f(x) + (rho/2) ||A x + B z - c + u||^2
    z <- argmin_z g(z) + (rho/2) ||A x + B z - c + u||^2
    u <- u + A x + B z - c

where u = y / rho is the scaled dual variable. Penalty parameter
updates are applied between iterations by :func:`run`, which rescales
u so that the unscaled dual y is continuous across changes of rho.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, Optional, Tuple

import numpy as np

from rbadmm.errors import ConfigurationError, DivergenceError


class ProblemInstance:
    """Base class for an ADMM problem.

    Subclasses provide the two subproblem solvers, the constraint
    operators and the objective terms. Variables may be arrays of any
    shape; norms are always taken over all elements.

    Attributes
    ----------
    x_shape, z_shape : tuple
        Shapes of the primal variables x and z.
    c : ndarray
        Constraint offset, which also fixes the shape of the constraint
        (and hence of u and y).
    """

    x_shape: Tuple[int, ...]
    z_shape: Tuple[int, ...]
    c: np.ndarray

    def solve_x(self, z, u, rho):
        """Return argmin_x f(x) + (rho/2) ||A x + B z - c + u||^2."""
        raise NotImplementedError

    def solve_z(self, x, u, rho):
        """Return argmin_z g(z) + (rho/2) ||A x + B z - c + u||^2."""
        raise NotImplementedError

    def A(self, x):
        raise NotImplementedError

    def AT(self, w):
        raise NotImplementedError

    def B(self, z):
        raise NotImplementedError

    def f(self, x):
        raise NotImplementedError

    def g(self, z):
        raise NotImplementedError

    def objective(self, x, z):
        """Functional value f(x) + g(z)."""
        return self.f(x) + self.g(z)

    @property
    def dims(self):
        """Sizes (n, m, p) of x, z and the constraint."""
        return (
            int(np.prod(self.x_shape)),
            int(np.prod(self.z_shape)),
            int(np.size(self.c)),
        )

    def rho_changed(self, rho):
        """Hook called by the engine after the penalty parameter changes."""


@dataclass(frozen=True)
class SolverState:
    """ADMM iterates at iteration ``k``.

    ``u`` is the scaled dual variable; the unscaled dual is ``y = rho * u``.
    """

    x: np.ndarray
    z: np.ndarray
    z_prev: np.ndarray
    u: np.ndarray
    rho: float
    k: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho > 0):
            raise ConfigurationError(f"rho must be positive and finite, got {self.rho}")

    @property
    def y(self):
        return self.rho * self.u


def initial_state(problem: ProblemInstance, rho: float, x=None, z=None, u=None):
    """Construct the state at k = 0, with zero iterates unless given."""
    cshape = np.shape(problem.c)
    x = np.zeros(problem.x_shape) if x is None else np.array(x, dtype=float)
    z = np.zeros(problem.z_shape) if z is None else np.array(z, dtype=float)
    u = np.zeros(cshape) if u is None else np.array(u, dtype=float)
    state = SolverState(x=x, z=z, z_prev=z.copy(), u=u, rho=float(rho), k=0)
    _check_dims(state, problem)
    return state


def _check_dims(state: SolverState, problem: ProblemInstance):
    expected = {
        "x": tuple(problem.x_shape),
        "z": tuple(problem.z_shape),
        "u": tuple(np.shape(problem.c)),
    }
    for name, shape in expected.items():
        got = np.shape(getattr(state, name))
        if got != shape:
            raise ConfigurationError(f"{name} has shape {got}, problem expects {shape}")


def _check_finite(**arrays):
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            raise DivergenceError(f"non-finite values in {name}")


def iterate(state: SolverState, problem: ProblemInstance) -> SolverState:
    """Apply one ADMM iteration at fixed rho."""
    _check_dims(state, problem)
    rho = state.rho
    x = problem.solve_x(state.z, state.u, rho)
    _check_finite(x=x)
    z = problem.solve_z(x, state.u, rho)
    _check_finite(z=z)
    u = state.u + problem.A(x) + problem.B(z) - problem.c
    _check_finite(u=u)
    return SolverState(x=x, z=z, z_prev=state.z, u=u, rho=rho, k=state.k + 1)


def rescale_dual(state: SolverState, rho_new: float) -> SolverState:
    """Change rho while holding the unscaled dual y = rho u fixed."""
    if not (np.isfinite(rho_new) and rho_new > 0):
        raise ConfigurationError(f"rho must be positive and finite, got {rho_new}")
    if rho_new == state.rho:
        return state
    u = state.u * (state.rho / rho_new)
    return dataclasses.replace(state, u=u, rho=float(rho_new))


@dataclass
class IterationRecord:
    k: int
    rho: float
    fval: float
    r_norm: float
    s_norm: float
    r_rel: float
    s_rel: float
    eps_pri: float
    eps_dua: float
    tau: float
    decision: str


@dataclass
class IterationTrace:
    """Per-iteration statistics of a solver run.

    ``records[i].rho`` is the penalty used to compute iteration ``k``;
    ``decision`` and ``tau`` describe the update applied after it.
    """

    records: list = field(default_factory=list)
    state: Optional[SolverState] = None
    converged: bool = False
    period: int = 1

    @property
    def iterations(self):
        return len(self.records)

    @property
    def stop_reason(self):
        return "converged" if self.converged else "max_iter"

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])

    def append(self, rec: IterationRecord):
        if self.records and rec.k != self.records[-1].k + 1:
            raise ValueError(f"trace gap: k={rec.k} follows k={self.records[-1].k}")
        self.records.append(rec)


def steps(problem, init, penalty=None, stop=None, halt=True) -> Iterator:
    """Generate ``(state, report, decision)`` for each ADMM iteration.

    Per iteration: iterate, compute residuals, check stopping, then
    (every ``penalty.period`` iterations, if not stopped) update rho.
    The yielded state is the one the residuals were computed from;
    ``decision`` is None when no penalty update was evaluated. The
    generator returns after the stopping criterion holds or after
    ``stop.max_iter`` iterations; with ``halt=False`` the stopping test
    is still reported but exactly ``stop.max_iter`` iterations are run.
    """
    from rbadmm.convergence import StoppingConfig, residual_report
    from rbadmm.penalty import PenaltyConfig, decide_rho

    penalty = PenaltyConfig.fixed() if penalty is None else penalty
    stop = StoppingConfig() if stop is None else stop
    if stop.max_iter < 1:
        raise ConfigurationError("max_iter must be at least 1")

    state = init
    _check_dims(state, problem)
    for _ in range(stop.max_iter):
        state = iterate(state, problem)
        report = residual_report(state, problem, stop)
        if not report.is_finite():
            raise DivergenceError(f"non-finite residuals at k={state.k}")
        decision = None
        stopped = halt and report.converged
        if (not stopped and penalty.variant != "fixed"
                and state.k % penalty.period == 0):
            if penalty.residual_flavor == "relative":
                rn, sn = report.r_rel_norm, report.s_rel_norm
            else:
                rn, sn = report.r_norm, report.s_norm
            decision = decide_rho(state.rho, rn, sn, penalty)
        yield state, report, decision
        if stopped:
            return
        if decision is not None and decision.rho != state.rho:
            state = rescale_dual(state, decision.rho)
            problem.rho_changed(decision.rho)


def run(problem, init=None, penalty=None, stop=None, rho0=1.0) -> IterationTrace:
    """Run ADMM to convergence or the iteration limit.

    If ``init`` is None, iterates start at zero with penalty ``rho0``.
    """
    from rbadmm.penalty import PenaltyConfig

    penalty = PenaltyConfig.fixed() if penalty is None else penalty
    if init is None:
        init = initial_state(problem, rho0)
    trace = IterationTrace(period=penalty.period)
    state = init
    for state, report, decision in steps(problem, init, penalty, stop):
        trace.append(IterationRecord(
            k=state.k,
            rho=state.rho,
            fval=float(problem.objective(state.x, state.z)),
            r_norm=report.r_norm,
            s_norm=report.s_norm,
            r_rel=report.r_rel_norm,
            s_rel=report.s_rel_norm,
            eps_pri=report.eps_pri,
            eps_dua=report.eps_dua,
            tau=1.0 if decision is None else decision.tau,
            decision="none" if decision is None else decision.tag,
        ))
        trace.converged = report.converged
    trace.state = state
    return trace
