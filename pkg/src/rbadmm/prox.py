"""Proximal operators shared by the problem instances."""

import numpy as np


def soft_threshold(v, t):
    r"""Elementwise soft thresholding, the proximal operator of
    :math:`t \|\cdot\|_1`.

    Returns ``sign(v) * max(|v| - t, 0)``.
    """
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
