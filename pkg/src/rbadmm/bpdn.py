"""Basis Pursuit DeNoising via ADMM.

    argmin_x (1/2) ||D x - sigma||^2 + lambda ||x||_1

split as f(x) = (1/2) ||D x - sigma||^2, g(z) = lambda ||z||_1 with
A = I, B = -I, c = 0. ``sigma`` may be a matrix of column signals
(multiple measurement vectors), which decouple in the splitting.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from rbadmm.core import ProblemInstance
from rbadmm.errors import ConfigurationError, NumericalError
from rbadmm.prox import soft_threshold


class BpdnProblem(ProblemInstance):
    """BPDN problem instance.

    Parameters
    ----------
    D : array_like (N, M)
        Dictionary.
    sigma : array_like (N,) or (N, K)
        Signal, or matrix of K signals.
    lmbda : float
        Regularisation parameter.
    method : {"auto", "gram", "woodbury"}
        How the x-update linear system is solved. ``"gram"`` factorises
        D^T D + rho I; ``"woodbury"`` factorises D D^T + rho I and applies
        the matrix inversion lemma. ``"auto"`` picks the smaller system.
    """

    def __init__(self, D, sigma, lmbda, method="auto"):
        self.D = np.asarray(D, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        if self.D.ndim != 2:
            raise ConfigurationError("D must be a 2-d array")
        if self.sigma.shape[0] != self.D.shape[0] or self.sigma.ndim > 2:
            raise ConfigurationError(
                f"sigma shape {self.sigma.shape} incompatible with D {self.D.shape}")
        if not lmbda > 0:
            raise ConfigurationError("lambda must be positive")
        if method not in ("auto", "gram", "woodbury"):
            raise ConfigurationError(f"unknown method {method!r}")
        if not np.all(np.isfinite(self.D)):
            raise NumericalError("non-finite values in D")
        self.lmbda = float(lmbda)
        N, M = self.D.shape
        if method == "auto":
            method = "woodbury" if M > N else "gram"
        self.method = method
        self.x_shape = (M,) + self.sigma.shape[1:]
        self.z_shape = self.x_shape
        self.c = np.zeros(self.x_shape)
        self.DTS = self.D.T @ self.sigma
        self._cache_rho = None
        self._factor = None

    def _factorise(self, rho):
        if self._cache_rho == rho:
            return self._factor
        if not (rho > 0 and np.isfinite(rho)):
            raise NumericalError(f"cannot factorise with rho = {rho}")
        N, M = self.D.shape
        if self.method == "gram":
            G = self.D.T @ self.D
            G[np.diag_indices(M)] += rho
        else:
            G = self.D @ self.D.T
            G[np.diag_indices(N)] += rho
        try:
            self._factor = scipy.linalg.cho_factor(G, lower=False, check_finite=False)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"Cholesky factorisation failed: {e}") from e
        self._cache_rho = rho
        return self._factor

    def rho_changed(self, rho):
        self._cache_rho = None
        self._factor = None

    def solve_normal(self, b, rho):
        """Solve (D^T D + rho I) x = b."""
        cf = self._factorise(rho)
        if self.method == "gram":
            return scipy.linalg.cho_solve(cf, b, check_finite=False)
        return (b - self.D.T @ scipy.linalg.cho_solve(cf, self.D @ b,
                                                      check_finite=False)) / rho

    def solve_x(self, z, u, rho):
        return self.solve_normal(self.DTS + rho * (z - u), rho)

    def solve_z(self, x, u, rho):
        return soft_threshold(x + u, self.lmbda / rho)

    def A(self, x):
        return x

    def AT(self, w):
        return w

    def B(self, z):
        return -z

    def f(self, x):
        return 0.5 * float(np.sum((self.D @ x - self.sigma) ** 2))

    def g(self, z):
        return self.lmbda * float(np.sum(np.abs(z)))

    def bpdn_objective(self, x):
        """(1/2) ||D x - sigma||^2 + lambda ||x||_1 at a single point."""
        return self.f(x) + self.g(x)


def default_lambda(D, sigma, fraction=0.1):
    """``fraction * ||D^T sigma||_inf``."""
    return fraction * float(np.max(np.abs(np.asarray(D).T @ np.asarray(sigma))))


def assemble_random_recovery(seed, N=128, M=1024, sparsity=16, noise_sd=0.5,
                             dict_sd=1.0, lmbda=None, method="auto"):
    """Random-dictionary sparse recovery problem.

    D has i.i.d. Gaussian entries with standard deviation ``dict_sd``,
    the reference coefficients have ``sparsity`` standard normal
    non-zeros at random positions, and the signal is D x_true plus
    Gaussian noise of standard deviation ``noise_sd``. If ``lmbda`` is
    None it is set by :func:`default_lambda`.

    Returns ``(problem, x_true)``.
    """
    if not 0 <= sparsity < M:
        raise ConfigurationError("sparsity must be in [0, M)")
    rng = np.random.default_rng(seed)
    D = dict_sd * rng.standard_normal((N, M))
    x_true = np.zeros(M)
    support = rng.choice(M, size=sparsity, replace=False)
    x_true[support] = rng.standard_normal(sparsity)
    sigma = D @ x_true + noise_sd * rng.standard_normal(N)
    if lmbda is None:
        lmbda = default_lambda(D, sigma)
    return BpdnProblem(D, sigma, lmbda, method=method), x_true
