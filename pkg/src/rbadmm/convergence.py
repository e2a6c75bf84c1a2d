"""Primal and dual residuals, their relative forms, and stopping rules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from rbadmm.errors import ConfigurationError

# Normalisation factors below NRM_FLOOR * max(||c||, 1) are treated as
# unusable and the absolute residual is reported in place of the
# relative one.
NRM_FLOOR = 1e-12

# Relative tolerance (against max{||A^T y||, ||y||}) for detecting the
# structural identity A^T y = s, which holds at every iterate when f is
# identically zero.
DEGENERATE_DUAL_RTOL = 1e-10


@dataclass(frozen=True)
class StoppingConfig:
    """Stopping tolerances.

    ``mode`` selects whether the test is applied to the standard
    residuals with normalised thresholds (``"standard"``) or to the
    relative residuals (``"relative"``). With ``eps_abs = 0`` the two
    are equivalent except in degenerate cases.
    """

    eps_abs: float = 0.0
    eps_rel: float = 1e-3
    max_iter: int = 1000
    mode: str = "relative"

    def __post_init__(self):
        if self.eps_abs < 0 or self.eps_rel < 0:
            raise ConfigurationError("tolerances must be non-negative")
        if not (self.eps_abs > 0 or self.eps_rel > 0):
            raise ConfigurationError("at least one of eps_abs, eps_rel must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if self.mode not in ("standard", "relative"):
            raise ConfigurationError(f"unknown stopping mode {self.mode!r}")


@dataclass(frozen=True)
class ResidualReport:
    r: np.ndarray
    s: np.ndarray
    r_norm: float
    s_norm: float
    r_nrm_factor: float
    s_nrm_factor: float
    r_rel_norm: float
    s_rel_norm: float
    eps_pri: float
    eps_dua: float
    degenerate_pri_nrm: bool
    degenerate_dual_nrm: bool
    converged: bool

    def is_finite(self):
        return bool(np.all(np.isfinite([
            self.r_norm, self.s_norm, self.r_nrm_factor, self.s_nrm_factor,
            self.r_rel_norm, self.s_rel_norm])))


class RelativeResiduals(NamedTuple):
    r_rel_norm: float
    s_rel_norm: float
    degenerate_pri_nrm: bool
    degenerate_dual_nrm: bool


def primal_residual(x, z, problem):
    """Primal residual A x + B z - c."""
    return problem.A(x) + problem.B(z) - problem.c


def dual_residual(z_new, z_prev, rho, problem):
    """Dual residual rho A^T B (z_new - z_prev)."""
    return rho * problem.AT(problem.B(z_new - z_prev))


def _floor(problem):
    return NRM_FLOOR * max(float(np.linalg.norm(problem.c)), 1.0)


class _Parts(NamedTuple):
    r: np.ndarray
    s: np.ndarray
    r_norm: float
    s_norm: float
    r_nrm: float
    s_nrm: float
    rel: RelativeResiduals


def _compute(state, problem) -> _Parts:
    Ax = problem.A(state.x)
    Bz = problem.B(state.z)
    r = Ax + Bz - problem.c
    # A^T B dz without the rho factor; s = rho * ATBdz
    ATBdz = problem.AT(problem.B(state.z - state.z_prev))
    s = state.rho * ATBdz
    ATu = problem.AT(state.u)
    r_norm = float(np.linalg.norm(r))
    s_norm = float(np.linalg.norm(s))
    r_nrm = max(float(np.linalg.norm(Ax)), float(np.linalg.norm(Bz)),
                float(np.linalg.norm(problem.c)))
    ATu_norm = float(np.linalg.norm(ATu))
    s_nrm = state.rho * ATu_norm

    floor = _floor(problem)
    degen_r = r_nrm < floor
    degen_s = s_nrm < floor
    if not degen_s and s_norm > 0:
        # A^T y == s identically when f == 0; the ratio is then always 1.
        # A^T y is a cancellation result, so rounding scales with ||y||.
        ATy = state.rho * ATu
        scale = max(s_nrm, state.rho * float(np.linalg.norm(state.u)))
        degen_s = float(np.linalg.norm(ATy - s)) <= DEGENERATE_DUAL_RTOL * scale
    r_rel = r_norm if degen_r else r_norm / r_nrm
    s_rel = s_norm if degen_s else float(np.linalg.norm(ATBdz)) / ATu_norm
    rel = RelativeResiduals(r_rel, s_rel, bool(degen_r), bool(degen_s))
    return _Parts(r, s, r_norm, s_norm, r_nrm, s_nrm, rel)


def relative_residuals(state, problem) -> RelativeResiduals:
    """Relative primal and dual residual norms with degeneracy flags.

    The primal residual is divided by max{||Ax||, ||Bz||, ||c||} and the
    dual residual by ||A^T y||, the latter computed in the equivalent
    u-form ||A^T B (z - z_prev)|| / ||A^T u||. A normalisation factor
    that is below the floor, or a dual normalisation that coincides with
    the dual residual itself, sets the corresponding flag and the
    absolute norm is returned instead.
    """
    return _compute(state, problem).rel


def _thresholds(parts: _Parts, problem, cfg: StoppingConfig):
    n, _, p = problem.dims
    if cfg.mode == "standard":
        eps_pri = np.sqrt(p) * cfg.eps_abs + cfg.eps_rel * parts.r_nrm
        eps_dua = np.sqrt(n) * cfg.eps_abs + cfg.eps_rel * parts.s_nrm
    else:
        r_nrm = 1.0 if parts.rel.degenerate_pri_nrm else parts.r_nrm
        s_nrm = 1.0 if parts.rel.degenerate_dual_nrm else parts.s_nrm
        eps_pri = np.sqrt(p) * cfg.eps_abs / r_nrm + cfg.eps_rel
        eps_dua = np.sqrt(n) * cfg.eps_abs / s_nrm + cfg.eps_rel
    return float(eps_pri), float(eps_dua)


def stopping_thresholds(state, problem, cfg: StoppingConfig):
    """Return ``(eps_pri, eps_dua)`` for the configured stopping mode."""
    return _thresholds(_compute(state, problem), problem, cfg)


def residual_report(state, problem, cfg: StoppingConfig) -> ResidualReport:
    """All residual quantities for ``state`` plus the stopping decision."""
    parts = _compute(state, problem)
    eps_pri, eps_dua = _thresholds(parts, problem, cfg)
    if cfg.mode == "standard":
        converged = parts.r_norm <= eps_pri and parts.s_norm <= eps_dua
    else:
        converged = parts.rel.r_rel_norm <= eps_pri and parts.rel.s_rel_norm <= eps_dua
    return ResidualReport(
        r=parts.r, s=parts.s,
        r_norm=parts.r_norm, s_norm=parts.s_norm,
        r_nrm_factor=parts.r_nrm, s_nrm_factor=parts.s_nrm,
        r_rel_norm=parts.rel.r_rel_norm, s_rel_norm=parts.rel.s_rel_norm,
        eps_pri=eps_pri, eps_dua=eps_dua,
        degenerate_pri_nrm=parts.rel.degenerate_pri_nrm,
        degenerate_dual_nrm=parts.rel.degenerate_dual_nrm,
        converged=bool(converged),
    )
