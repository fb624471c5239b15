"""Zero-forcing beamforming and downlink power allocation.

Beamformers are the columns of the right pseudo-inverse of the stacked
estimated channel, renormalized to unit norm: user k's beam is the
projection of its channel estimate onto the null space of all other
scheduled estimates.  Power is split either equally or by classical
waterfilling on the post-beamforming channel gains.
"""

from __future__ import annotations

import numpy as np

_RANK_TOL = 1e-10


def zf_beamformers(h_hat: np.ndarray) -> np.ndarray:
    """Unit-norm zero-forcing beamformers for an (M, K) matrix whose columns
    are the scheduled users' channel estimates.

    Raises ValueError when K > M or the columns are linearly dependent
    (coincident users), naming the offending columns where identifiable.
    """
    h_hat = np.asarray(h_hat)
    if h_hat.ndim != 2:
        raise ValueError("expected a 2D matrix of channel columns")
    m, k = h_hat.shape
    if k > m:
        raise ValueError(f"cannot zero-force {k} users with {m} antennas")
    s = np.linalg.svd(h_hat, compute_uv=False)
    if s[-1] <= _RANK_TOL * s[0]:
        norms = np.linalg.norm(h_hat, axis=0)
        bad = [i for i, v in enumerate(norms) if v <= _RANK_TOL]
        if not bad:
            unit = h_hat / norms
            gram = np.abs(unit.conj().T @ unit)
            pairs = [(i, j) for i in range(k) for j in range(i + 1, k)
                     if gram[i, j] >= 1.0 - 1e-8]
            bad = sorted({i for p in pairs for i in p})
        detail = f" (columns {bad})" if bad else ""
        raise ValueError("channel matrix is rank deficient, coincident or "
                         f"zero user estimates{detail}")
    w = h_hat @ np.linalg.inv(h_hat.conj().T @ h_hat)
    return w / np.linalg.norm(w, axis=0, keepdims=True)


def zf_beamformers_batch(h_hat: np.ndarray) -> np.ndarray:
    """Batched unit-norm ZF for (..., M, K) stacks via the normal equations.

    No rank diagnostics; continuous fading makes deficiency a null event,
    so the hot path skips the SVD.
    """
    h_hat = np.asarray(h_hat)
    gram = h_hat.conj().swapaxes(-1, -2) @ h_hat
    w = np.linalg.solve(gram, h_hat.conj().swapaxes(-1, -2))
    w = w.conj().swapaxes(-1, -2)
    return w / np.linalg.norm(w, axis=-2, keepdims=True)


def allocate_equal(n_users: int, budget: float) -> np.ndarray:
    """Split budget equally over n_users streams."""
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    if budget < 0:
        raise ValueError("budget must be non-negative")
    return np.full(n_users, budget / n_users)


def allocate_waterfilling(gains: np.ndarray, budget: float) -> np.ndarray:
    """Waterfilling powers p_k = max(0, mu - 1/g_k) with sum p = budget.

    gains is (..., K) of positive post-beamforming channel gains; leading
    axes are independent problems solved in one vectorized pass.  The water
    level comes from the largest active set whose weakest member still gets
    positive power, which satisfies the KKT conditions exactly.
    """
    gains = np.asarray(gains, dtype=float)
    if np.any(gains <= 0):
        raise ValueError("gains must be positive")
    if budget <= 0:
        raise ValueError("budget must be positive")
    inv = np.sort(1.0 / gains, axis=-1)  # best channel first
    k = gains.shape[-1]
    csum = np.cumsum(inv, axis=-1)
    counts = np.arange(1, k + 1, dtype=float)
    levels = (budget + csum) / counts
    active = levels > inv  # feasible active-set sizes
    n_active = np.sum(active, axis=-1)  # last True is the optimum
    level = np.take_along_axis(levels, n_active[..., None] - 1, axis=-1)
    return np.maximum(0.0, level - 1.0 / gains)
