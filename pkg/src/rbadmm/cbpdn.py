"""Convolutional BPDN via ADMM.

    argmin_{x_m} (1/2) || sum_m d_m * x_m - sigma ||^2 + lambda sum_m ||x_m||_1

with circular convolution throughout. The x-update is solved in the
DFT domain, where at each frequency the system matrix is a rank-one
term plus a multiple of the identity, so the Sherman-Morrison formula
gives the solution in O(M) operations per frequency.

Array layout: images are (K, H, W); filters are (M, L, L) and are
zero-padded to (H, W) with their origin at index (0, 0); coefficient
maps are (K, M, H, W).
"""

from __future__ import annotations

import numpy as np

from rbadmm.core import ProblemInstance
from rbadmm.errors import ConfigurationError
from rbadmm.prox import soft_threshold

DEFAULT_LAMBDA_L = 5.0


def gradient_spectrum(shape):
    """|g_h|^2 + |g_v|^2 for circular forward differences on ``shape``."""
    H, W = shape
    gh = np.abs(1.0 - np.exp(-2j * np.pi * np.arange(H) / H)) ** 2
    gw = np.abs(1.0 - np.exp(-2j * np.pi * np.arange(W) / W)) ** 2
    return gh[:, None] + gw[None, :]


def highpass_preprocess(image, lambda_L=DEFAULT_LAMBDA_L):
    """Split ``image`` into lowpass and highpass components.

    The lowpass component minimises (1/2) ||x - image||^2 +
    lambda_L ||grad x||^2 with circular forward differences, computed
    in the DFT domain over the last two axes. Returns
    ``(lowpass, highpass)`` with ``highpass = image - lowpass``.
    """
    if lambda_L < 0:
        raise ConfigurationError("lambda_L must be non-negative")
    image = np.asarray(image, dtype=float)
    if lambda_L == 0:
        return image.copy(), np.zeros_like(image)
    G = gradient_spectrum(image.shape[-2:])
    low = np.fft.ifft2(np.fft.fft2(image) / (1.0 + 2.0 * lambda_L * G)).real
    return low, image - low


def pad_filters(filters, shape):
    filters = np.asarray(filters, dtype=float)
    if filters.ndim == 2:
        filters = filters[None]
    M, Lh, Lw = filters.shape
    H, W = shape
    if Lh > H or Lw > W:
        raise ConfigurationError("filters larger than image")
    padded = np.zeros((M, H, W))
    padded[:, :Lh, :Lw] = filters
    return padded


class CbpdnProblem(ProblemInstance):
    """Convolutional BPDN problem instance.

    Parameters
    ----------
    filters : array_like (M, L, L)
        Dictionary filters.
    images : array_like (H, W) or (K, H, W)
        Image, or set of K images that are represented jointly.
    lmbda : float
        Regularisation parameter.
    """

    def __init__(self, filters, images, lmbda):
        images = np.asarray(images, dtype=float)
        if images.ndim == 2:
            images = images[None]
        if images.ndim != 3:
            raise ConfigurationError("images must be (H, W) or (K, H, W)")
        if not lmbda > 0:
            raise ConfigurationError("lambda must be positive")
        self.sigma = images
        self.lmbda = float(lmbda)
        K, H, W = images.shape
        self.image_shape = (H, W)
        self.filters = pad_filters(filters, (H, W))
        M = self.filters.shape[0]
        self.Df = np.fft.rfft2(self.filters)
        self.Sf = np.fft.rfft2(images)
        # D^H s in the DFT domain, (K, M, H, W//2+1)
        self.DSf = np.conj(self.Df)[None] * self.Sf[:, None]
        self.Dnrm2 = np.sum(np.abs(self.Df) ** 2, axis=0)
        self.x_shape = (K, M, H, W)
        self.z_shape = self.x_shape
        self.c = np.zeros(self.x_shape)

    @property
    def num_filters(self):
        return self.filters.shape[0]

    def _fft(self, x):
        return np.fft.rfft2(x)

    def _ifft(self, xf):
        return np.fft.irfft2(xf, s=self.image_shape)

    def solve_freq(self, bf, rho):
        """Solve (conj(d) d^T + rho I) x = b at every frequency."""
        if not rho > 0:
            raise ConfigurationError("rho must be positive")
        Dc = np.conj(self.Df)
        a = np.sum(self.Df[None] * bf, axis=1, keepdims=True)
        return (bf - Dc[None] * (a / (rho + self.Dnrm2)[None, None])) / rho

    def solve_x(self, z, u, rho):
        bf = self.DSf + rho * self._fft(z - u)
        return self._ifft(self.solve_freq(bf, rho))

    def solve_z(self, x, u, rho):
        return soft_threshold(x + u, self.lmbda / rho)

    def A(self, x):
        return x

    def AT(self, w):
        return w

    def B(self, z):
        return -z

    def reconstruct(self, x):
        """sum_m d_m * x_m for each image."""
        return self._ifft(np.sum(self.Df[None] * self._fft(x), axis=1))

    def f(self, x):
        return 0.5 * float(np.sum((self.reconstruct(x) - self.sigma) ** 2))

    def g(self, z):
        return self.lmbda * float(np.sum(np.abs(z)))

    def data_fidelity_freq(self, x):
        """Data term evaluated in the DFT domain via Parseval's identity."""
        H, W = self.image_shape
        Df = np.fft.fft2(self.filters)
        Xf = np.fft.fft2(x)
        Rf = np.sum(Df[None] * Xf, axis=1) - np.fft.fft2(self.sigma)
        return 0.5 * float(np.sum(np.abs(Rf) ** 2)) / (H * W)

    def dense_dictionary(self):
        """Block-circulant matrix D with D @ x_k.ravel() = reconstruct(x)[k].ravel().

        Columns are ordered as the (M, H, W) ravel of one image's
        coefficient maps. Intended for small instances only.
        """
        M = self.num_filters
        H, W = self.image_shape
        cols = np.empty((H * W, M * H * W))
        j = 0
        for m in range(M):
            for r in range(H):
                for s in range(W):
                    cols[:, j] = np.roll(self.filters[m], (r, s), axis=(0, 1)).ravel()
                    j += 1
        return cols


def random_filters(M, L, seed=None):
    """M random L x L filters, zero mean and unit l2 norm."""
    rng = np.random.default_rng(seed)
    d = rng.standard_normal((M, L, L))
    d -= d.mean(axis=(1, 2), keepdims=True)
    d /= np.linalg.norm(d.reshape(M, -1), axis=1)[:, None, None]
    return d
