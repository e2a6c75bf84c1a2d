"""Residual-balancing penalty parameter policies.

All policies share the three-branch rule

    rho * tau   if r > xi * mu * s
    rho / tau   if s > (mu / xi) * r
    rho         otherwise

and differ in which residual norms (standard or relative) are
compared, in the target ratio ``xi``, and in whether ``tau`` is fixed
or chosen from the current residual ratio.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import NamedTuple

from rbadmm.errors import ConfigurationError

VARIANTS = ("fixed", "standard_balance", "xi_balance", "relative_balance")

# Default fit constant of the xi(lambda) heuristic.
XI_HEURISTIC_A = 18.3


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty update policy.

    ``standard_balance`` compares standard residuals with target ratio
    1 (``xi`` is ignored); ``xi_balance`` compares standard residuals
    with target ratio ``xi``; ``relative_balance`` compares relative
    residuals with target ratio ``xi``. When ``tau_mode`` is
    ``"adaptive"`` the multiplier is chosen by :func:`decide_tau` and
    bounded by ``tau_max``.
    """

    variant: str = "relative_balance"
    mu: float = 10.0
    tau: float = 2.0
    tau_mode: str = "fixed"
    tau_max: float = 100.0
    xi: float = 1.0
    period: int = 10
    rho_min: float = 1e-8
    rho_max: float = 1e8

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown penalty variant {self.variant!r}")
        if self.tau_mode not in ("fixed", "adaptive"):
            raise ConfigurationError(f"unknown tau_mode {self.tau_mode!r}")
        if not self.mu > 1:
            raise ConfigurationError("mu must be greater than 1")
        if not self.tau > 1:
            raise ConfigurationError("tau must be greater than 1")
        if not self.tau_max > 1:
            raise ConfigurationError("tau_max must be greater than 1")
        if self.tau_mode == "fixed" and self.tau_max < self.tau:
            raise ConfigurationError("tau_max must be at least tau")
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise ConfigurationError("xi must be positive")
        if self.period < 1:
            raise ConfigurationError("period must be at least 1")
        if not 0 < self.rho_min <= self.rho_max:
            raise ConfigurationError("require 0 < rho_min <= rho_max")

    @classmethod
    def fixed(cls, **kw):
        return cls(variant="fixed", **kw)

    @property
    def residual_flavor(self):
        return "relative" if self.variant == "relative_balance" else "standard"

    @property
    def target_ratio(self):
        return 1.0 if self.variant == "standard_balance" else self.xi

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)


class RhoDecision(NamedTuple):
    rho: float
    tag: str
    tau: float


def _check_norms(r_norm, s_norm):
    if not (math.isfinite(r_norm) and math.isfinite(s_norm)):
        raise ConfigurationError(f"non-finite residual norms ({r_norm}, {s_norm})")
    if r_norm < 0 or s_norm < 0:
        raise ConfigurationError("residual norms must be non-negative")


def decide_tau(r_norm, s_norm, cfg: PenaltyConfig) -> float:
    """Adaptive multiplier from the residual ratio.

    With q = sqrt(r / (xi s)): q if 1 <= q < tau_max, 1/q if
    1/tau_max < q < 1, and tau_max otherwise.
    """
    _check_norms(r_norm, s_norm)
    if r_norm == 0 and s_norm == 0:
        return 1.0
    xi = cfg.target_ratio
    if s_norm == 0:
        return cfg.tau_max
    q = math.sqrt(r_norm / (xi * s_norm))
    if 1.0 <= q < cfg.tau_max:
        return q
    if 1.0 / cfg.tau_max < q < 1.0:
        return math.sqrt(xi * s_norm / r_norm)
    return cfg.tau_max


def decide_rho(rho, r_norm, s_norm, cfg: PenaltyConfig) -> RhoDecision:
    """Apply the residual balancing rule to ``rho``.

    ``r_norm`` and ``s_norm`` must already be in the flavour given by
    ``cfg.residual_flavor``. The tag is one of ``increase``,
    ``decrease``, ``hold`` or ``clamped`` (the rule fired but the
    result was limited by ``rho_min``/``rho_max``).
    """
    if not (rho > 0 and math.isfinite(rho)):
        raise ConfigurationError(f"rho must be positive and finite, got {rho}")
    _check_norms(r_norm, s_norm)
    if cfg.variant == "fixed" or (r_norm == 0 and s_norm == 0):
        return RhoDecision(rho, "hold", 1.0)

    xi = cfg.target_ratio
    if r_norm > xi * cfg.mu * s_norm:
        tag = "increase"
    elif s_norm > (cfg.mu / xi) * r_norm:
        tag = "decrease"
    else:
        return RhoDecision(rho, "hold", 1.0)

    tau = decide_tau(r_norm, s_norm, cfg) if cfg.tau_mode == "adaptive" else cfg.tau
    rho_new = rho * tau if tag == "increase" else rho / tau
    if rho_new > cfg.rho_max or rho_new < cfg.rho_min:
        rho_new = min(max(rho_new, cfg.rho_min), cfg.rho_max)
        tag = "clamped"
    return RhoDecision(rho_new, tag, tau)


def xi_for_scaling(alpha, beta, gamma) -> float:
    """Target ratio alpha gamma / beta compensating a problem scaling.

    Under (alpha, beta, gamma) the primal residual scales by beta and
    the dual residual by alpha gamma, so ``xi_balance`` with this ratio
    on the original problem takes the same decisions as
    ``standard_balance`` on the scaled problem.
    """
    for name, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not (v > 0 and math.isfinite(v)):
            raise ConfigurationError(f"{name} must be positive and finite")
    return alpha * gamma / beta


def xi_heuristic(lmbda, a=XI_HEURISTIC_A) -> float:
    """Heuristic target ratio 1 + a**(log10(lambda) + 1)."""
    if not lmbda > 0:
        raise ConfigurationError("lambda must be positive")
    if not a > 0:
        raise ConfigurationError("a must be positive")
    return 1.0 + a ** (math.log10(lmbda) + 1.0)
