"""Pure NumPy split-search kernel (fallback for the compiled extension).

Must stay numerically identical to _split.pyx: same accumulation order
(sequential cumsum), same gain expression, same first-max tie handling.
"""

from __future__ import annotations

import numpy as np


def best_split_sorted(
    values: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    l2_lambda: float,
    gamma: float,
) -> tuple[float, float, int] | None:
    """Best boundary split of one feature, arrays pre-sorted by value.

    Returns (gain, threshold, n_left) with rows going left when
    value < threshold, or None when no candidate has positive gain.
    """
    n = values.shape[0]
    if n < 2:
        return None
    cum_g = np.cumsum(grad)
    cum_h = np.cumsum(hess)
    total_g = cum_g[-1]
    total_h = cum_h[-1]
    gl = cum_g[:-1]
    hl = cum_h[:-1]
    gr = total_g - gl
    hr = total_h - hl
    parent = total_g * total_g / (total_h + l2_lambda)
    gains = 0.5 * (gl * gl / (hl + l2_lambda) + gr * gr / (hr + l2_lambda) - parent) - gamma
    boundary = values[1:] != values[:-1]
    if not boundary.any():
        return None
    gains = np.where(boundary, gains, -np.inf)
    pos = int(np.argmax(gains))
    gain = float(gains[pos])
    if not gain > 0.0:
        return None
    threshold = (values[pos] + values[pos + 1]) / 2.0
    return gain, float(threshold), pos + 1
