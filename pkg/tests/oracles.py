"""Independent reference computations used as test oracles."""

import numpy as np

from rbadmm.core import ProblemInstance


def bpdn_fista(D, sigma, lmbda, max_iter=1_000_000, rtol=1e-14):
    """Accelerated proximal gradient for (1/2)||Dx - s||^2 + lmbda ||x||_1.

    Momentum is reset whenever the step opposes the gradient mapping.
    Stops when the relative change in x falls below ``rtol``. Returns
    ``(x, objective)``.
    """
    D = np.asarray(D, float)
    L = np.linalg.norm(D, 2) ** 2
    DTD = D.T @ D
    DTs = D.T @ sigma
    x = np.zeros(D.shape[1])
    y = x.copy()
    t = 1.0
    for _ in range(max_iter):
        v = y - (DTD @ y - DTs) / L
        xn = np.sign(v) * np.maximum(np.abs(v) - lmbda / L, 0)
        if np.dot(y - xn, xn - x) > 0:
            t = tn = 1.0
        else:
            tn = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        y = xn + ((t - 1) / tn) * (xn - x)
        change = np.linalg.norm(xn - x) / max(np.linalg.norm(xn), 1e-300)
        x, t = xn, tn
        if change < rtol:
            break
    fx = 0.5 * np.sum((D @ x - sigma) ** 2) + lmbda * np.sum(np.abs(x))
    return x, float(fx)


def circular_conv2d(d, x):
    """Direct circular convolution sum_{p,q} d[p,q] x[i-p, j-q]."""
    H, W = x.shape
    out = np.zeros((H, W))
    for p in range(d.shape[0]):
        for q in range(d.shape[1]):
            out += d[p, q] * np.roll(x, (p, q), axis=(0, 1))
    return out


def forward_diff_matrices(n):
    """Dense circular forward-difference operators on an n x n image."""
    N = n * n
    I = np.eye(N)
    idx = np.arange(N).reshape(n, n)
    G0 = -I.copy()
    G1 = -I.copy()
    G0[idx.ravel(), np.roll(idx, -1, axis=0).ravel()] += 1
    G1[idx.ravel(), np.roll(idx, -1, axis=1).ravel()] += 1
    return G0, G1


class TvL1Problem(ProblemInstance):
    """TV-l1 denoising with f = 0, A = [G0; G1; I], B = -I, c = [0; 0; s].

    g(z) = ||z_s||_1 + lmbda ||sqrt(z_0^2 + z_1^2)||_1, so that the
    constraint makes z_s = x - s.
    """

    def __init__(self, s, lmbda):
        s = np.asarray(s, float)
        n = s.shape[0]
        self.npix = n * n
        G0, G1 = forward_diff_matrices(n)
        self.Amat = np.vstack([G0, G1, np.eye(self.npix)])
        self.AtA_inv = np.linalg.inv(self.Amat.T @ self.Amat)
        self.lmbda = lmbda
        self.x_shape = (self.npix,)
        self.z_shape = (3 * self.npix,)
        self.c = np.concatenate([np.zeros(2 * self.npix), s.ravel()])

    def solve_x(self, z, u, rho):
        return self.AtA_inv @ (self.Amat.T @ (z + self.c - u))

    def solve_z(self, x, u, rho):
        v = self.A(x) - self.c + u
        P = self.npix
        v0, v1, vs = v[:P], v[P:2 * P], v[2 * P:]
        zs = np.sign(vs) * np.maximum(np.abs(vs) - 1 / rho, 0)
        mag = np.sqrt(v0 ** 2 + v1 ** 2)
        shrink = np.where(mag > 0, np.maximum(mag - self.lmbda / rho, 0) / np.where(mag > 0, mag, 1), 0)
        return np.concatenate([shrink * v0, shrink * v1, zs])

    def A(self, x):
        return self.Amat @ x

    def AT(self, w):
        return self.Amat.T @ w

    def B(self, z):
        return -z

    def f(self, x):
        return 0.0

    def g(self, z):
        P = self.npix
        return float(np.sum(np.abs(z[2 * P:])) +
                     self.lmbda * np.sum(np.sqrt(z[:P] ** 2 + z[P:2 * P] ** 2)))


class QuadraticProblem(ProblemInstance):
    """f(x) = (1/2)||x - a||^2, g(z) = (1/2)||z - b||^2, A x + B z = c, all dense."""

    def __init__(self, A, B, c, a, b):
        self.Am, self.Bm = np.asarray(A, float), np.asarray(B, float)
        self.c = np.asarray(c, float)
        self.a, self.b = np.asarray(a, float), np.asarray(b, float)
        self.x_shape = self.a.shape
        self.z_shape = self.b.shape

    @classmethod
    def random(cls, seed, n=6, m=5, p=7):
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((p, n)), rng.standard_normal((p, m)),
                   rng.standard_normal(p), rng.standard_normal(n), rng.standard_normal(m))

    def solve_x(self, z, u, rho):
        A = self.Am
        lhs = np.eye(A.shape[1]) + rho * A.T @ A
        return np.linalg.solve(lhs, self.a - rho * A.T @ (self.Bm @ z - self.c + u))

    def solve_z(self, x, u, rho):
        B = self.Bm
        lhs = np.eye(B.shape[1]) + rho * B.T @ B
        return np.linalg.solve(lhs, self.b - rho * B.T @ (self.Am @ x - self.c + u))

    def A(self, x):
        return self.Am @ x

    def AT(self, w):
        return self.Am.T @ w

    def B(self, z):
        return self.Bm @ z

    def f(self, x):
        return 0.5 * float(np.sum((x - self.a) ** 2))

    def g(self, z):
        return 0.5 * float(np.sum((z - self.b) ** 2))
