"""ADMM with residual-balancing penalty parameter policies.

Provides a generic scaled-form ADMM engine, standard and relative
(normalised) residuals, the family of residual-balancing penalty
updates, BPDN and convolutional BPDN problem instances, and tools for
checking the behaviour of ADMM iterates under problem scaling.
"""

from rbadmm.errors import ConfigurationError, DivergenceError, NumericalError
from rbadmm.core import (
    IterationRecord,
    IterationTrace,
    ProblemInstance,
    SolverState,
    initial_state,
    iterate,
    rescale_dual,
    run,
    steps,
)
from rbadmm.convergence import (
    ResidualReport,
    StoppingConfig,
    dual_residual,
    primal_residual,
    relative_residuals,
    residual_report,
    stopping_thresholds,
)
from rbadmm.penalty import (
    PenaltyConfig,
    RhoDecision,
    decide_rho,
    decide_tau,
    xi_for_scaling,
    xi_heuristic,
)
from rbadmm.bpdn import BpdnProblem, assemble_random_recovery
from rbadmm.cbpdn import CbpdnProblem, highpass_preprocess
from rbadmm.prox import soft_threshold
from rbadmm.scaling import (
    GraphFormScaling,
    ScalingTriple,
    VerificationReport,
    scale_penalty,
    scale_problem,
    scale_iterates,
    scaled_rho,
    verify_equivariance,
)

__version__ = "0.1.0"
