"""Gamma-approximation ergodic rates for zero-forcing downlink.

Signal and interference powers after zero-forcing are modeled as Gamma
random variables.  For single-cell transmission the per-link terms follow
directly from the order statistics of ZF on MMSE estimates; for joint
network-MIMO transmission the aggregate channel has per-BS blocks with
unequal variances, which are first mapped to an equivalent i.i.d. channel
matching the first two moments of the squared channel norm.  Ergodic rates
come from E[log2(1 + X)] of moment-matched Gamma mixtures, evaluated by a
trapezoid rule on an exponential integral representation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Node grid for E[log(1+X)]: with X ~ Gamma(mu, theta), substituting
# t = e^u into int_0^inf e^-t (1 - (1+theta t)^-mu) / t dt gives an
# integrand decaying double-exponentially on the right and like mu*theta*e^u
# on the left, so a fixed grid covers every scale used here.  The trapezoid
# error shrinks like exp(-pi^2/step); the default step is exact to ~1e-14.
_U_LO = -85.0
_U_HI = 4.0
_DEFAULT_STEP = 0.25
_CHUNK = 4096


@dataclass(frozen=True)
class GammaDist:
    """Gamma distribution in shape/scale form; mean = shape * scale.

    shape = 0 or scale = 0 denotes the degenerate point mass at zero, which
    shows up naturally for empty interference sets and perfect CSI.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape < 0 or self.scale < 0:
            raise ValueError("shape and scale must be non-negative")

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale ** 2


def gamma_scale(c: float, dist: GammaDist) -> GammaDist:
    """Distribution of c*X for X ~ dist (c >= 0)."""
    if c < 0:
        raise ValueError("scaling constant must be non-negative")
    return GammaDist(dist.shape, c * dist.scale)


def gamma_sum_same_scale(dists: Sequence[GammaDist]) -> GammaDist:
    """Exact distribution of a sum of independent Gammas sharing one scale."""
    if not dists:
        raise ValueError("need at least one distribution")
    scales = [d.scale for d in dists if d.shape > 0]
    if not scales:
        return GammaDist(0.0, 0.0)
    ref = scales[0]
    if any(abs(s - ref) > 1e-9 * max(ref, 1e-300) for s in scales):
        raise ValueError("scales differ; use moment_match for mixed scales")
    return GammaDist(sum(d.shape for d in dists if d.shape > 0), ref)


def _moment_match_arrays(mus: np.ndarray, thetas: np.ndarray):
    """Moment matching along the last axis of (..., n) shape/scale stacks."""
    m1 = np.sum(mus * thetas, axis=-1)
    m2 = np.sum(mus * thetas ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(m2 > 0, m1 ** 2 / np.where(m2 > 0, m2, 1.0), 0.0)
        theta = np.where(m1 > 0, m2 / np.where(m1 > 0, m1, 1.0), 0.0)
    return mu, theta


def moment_match(dists: Sequence[GammaDist]) -> GammaDist:
    """Single Gamma with the exact mean and variance of an independent sum.

    Matching is grouping-invariant because both moments are additive, and a
    single input is returned unchanged.
    """
    if not dists:
        raise ValueError("need at least one distribution")
    mus = np.array([d.shape for d in dists])
    thetas = np.array([d.scale for d in dists])
    mu, theta = _moment_match_arrays(mus, thetas)
    return GammaDist(float(mu), float(theta))


@dataclass(frozen=True)
class EiidParams:
    """Equivalent i.i.d. description of an aggregate multi-BS channel.

    A length-n_dim vector with per-block variances alpha_b is replaced by
    i.i.d. entries such that the squared norm keeps its first two moments:
    ||h||^2 ~ Gamma(mu_a, theta_a) with mu_a = N_t (sum alpha)^2 / sum
    alpha^2 and theta_a = sum alpha^2 / sum alpha.  eff_dof = mu_a / n_dim
    in [1/B, 1] discounts the spatial degrees of freedom.  kappa2/sigma2
    split theta_a between the MMSE estimate and its error for pilots of
    energy n_bs * power.
    """

    mu_a: float
    theta_a: float
    eff_dof: float
    kappa2: float
    sigma2: float
    n_dim: int
    sum_power: float


def eiid_params(alpha_row, n_t: int, power: float,
                perfect_csi: bool = False) -> EiidParams:
    """Equivalent i.i.d. parameters for one user's path gains to all BSs."""
    alpha = np.asarray(alpha_row, dtype=float)
    if alpha.ndim != 1 or alpha.size < 1:
        raise ValueError("alpha_row must be a 1D vector of path gains")
    if np.any(alpha < 0) or alpha.sum() <= 0:
        raise ValueError("path gains must be non-negative with positive sum")
    n_bs = alpha.size
    s1 = float(alpha.sum())
    s2 = float(np.sum(alpha ** 2))
    theta_a = s2 / s1
    mu_a = n_t * s1 ** 2 / s2
    sigma2 = 0.0 if perfect_csi else theta_a / (1.0 + n_bs * power * theta_a)
    return EiidParams(mu_a, theta_a, mu_a / (n_bs * n_t), theta_a - sigma2,
                      sigma2, n_bs * n_t, n_bs * power)


def nmt_signal_params(eiid: EiidParams, n_users: int) -> GammaDist:
    """Desired-signal power Gamma for joint ZF serving n_users streams.

    ZF onto the null space of n_users - 1 companions leaves n_dim -
    n_users + 1 of the n_dim dimensions, discounted by eff_dof; the scale
    is the estimated-channel share kappa2 times the equal power split of
    the pooled budget."""
    if not 1 <= n_users <= eiid.n_dim:
        raise ValueError("group size must be within the aggregate dimensions")
    shape = (eiid.n_dim - n_users + 1) * eiid.eff_dof
    return GammaDist(shape, eiid.kappa2 * eiid.sum_power / n_users)


def nmt_interference_params(eiid: EiidParams, n_users: int) -> GammaDist:
    """Residual multiuser interference Gamma caused by estimation error:
    n_users - 1 unit-power leakage streams through the sigma2 error part."""
    if not 1 <= n_users <= eiid.n_dim:
        raise ValueError("group size must be within the aggregate dimensions")
    shape = (n_users - 1) * eiid.mu_a / eiid.n_dim
    return GammaDist(shape, eiid.sigma2 * eiid.sum_power / n_users)


def _elg_arrays(mu: np.ndarray, theta: np.ndarray,
                step: float = _DEFAULT_STEP) -> np.ndarray:
    """Vectorized E[log2(1+X)], X ~ Gamma(mu, theta), elementwise over
    broadcast arrays.  Degenerate mu*theta = 0 entries give 0."""
    mu, theta = np.broadcast_arrays(np.asarray(mu, float),
                                    np.asarray(theta, float))
    if np.any(mu < 0) or np.any(theta < 0):
        raise ValueError("negative Gamma parameters")
    out = np.zeros(mu.shape)
    flat_mu = mu.ravel()
    flat_th = theta.ravel()
    flat_out = out.ravel()
    live = (flat_mu > 0) & (flat_th > 0)
    idx = np.nonzero(live)[0]
    u = np.arange(_U_LO, _U_HI + step / 2.0, step)
    t = np.exp(u)
    emt = np.exp(-t)
    for start in range(0, idx.size, _CHUNK):
        sel = idx[start:start + _CHUNK]
        m = flat_mu[sel][:, None]
        th = flat_th[sel][:, None]
        f = emt * -np.expm1(-m * np.log1p(th * t))
        flat_out[sel] = np.trapezoid(f, dx=step, axis=-1)
    out /= np.log(2.0)
    return out


def exp_log1p_gamma(dist: GammaDist, step: float = _DEFAULT_STEP) -> float:
    """E[log2(1 + X)] for X ~ dist in bits.

    Evaluates int_0^inf e^-t (1 - (1 + theta t)^-mu)/t dt by trapezoid on a
    logarithmic grid; the default step keeps the error near machine
    precision (halve step for stricter tolerances, at linear cost)."""
    return float(_elg_arrays(np.array(dist.shape), np.array(dist.scale),
                             step))


def nmt_rates(alphas: np.ndarray, n_users: int, n_t: int, power: float,
              perfect_csi: bool = False) -> np.ndarray:
    """Ergodic network-MIMO ZF rate [bit/s/Hz] per row of (n, B) path gains,
    with n_users jointly served streams sharing the pooled power.

    Uses the exact-moment split E[log2(1+S+I)] - E[log2(1+I)] with S + I
    moment matched, where S and I are the equivalent-i.i.d. Gamma models of
    desired signal and residual interference."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    n_bs = alphas.shape[-1]
    n_dim = n_bs * n_t
    if not 1 <= n_users <= n_dim:
        raise ValueError("group size must be within the aggregate dimensions")
    s1 = alphas.sum(axis=-1)
    s2 = np.sum(alphas ** 2, axis=-1)
    if np.any(alphas < 0) or np.any(s1 <= 0):
        raise ValueError("path gains must be non-negative with positive sum")
    theta_a = s2 / s1
    mu_a = n_t * s1 ** 2 / s2
    sigma2 = np.zeros_like(theta_a) if perfect_csi else \
        theta_a / (1.0 + n_bs * power * theta_a)
    kappa2 = theta_a - sigma2
    p_share = n_bs * power / n_users
    mu_s = (n_dim - n_users + 1) * mu_a / n_dim
    th_s = kappa2 * p_share
    mu_i = np.full_like(theta_a, (n_users - 1) / n_dim) * mu_a
    th_i = sigma2 * p_share
    mu_tot, th_tot = _moment_match_arrays(
        np.stack([np.broadcast_to(mu_s, theta_a.shape), mu_i], axis=-1),
        np.stack([th_s, th_i], axis=-1))
    return _elg_arrays(mu_tot, th_tot) - _elg_arrays(mu_i, th_i)


def nmt_conditional_rate(alpha_row, n_users: int, n_t: int, power: float,
                         perfect_csi: bool = False) -> float:
    """Scalar wrapper of nmt_rates for a single user's path-gain row."""
    alpha = np.asarray(alpha_row, dtype=float)
    if alpha.ndim != 1:
        raise ValueError("alpha_row must be a 1D vector of path gains")
    return float(nmt_rates(alpha[None, :], n_users, n_t, power,
                           perfect_csi)[0])


def cst_rates(alphas: np.ndarray, serving: np.ndarray, group_sizes,
              n_t: int, power: float, perfect_csi: bool = False) -> np.ndarray:
    """Ergodic single-cell ZF rate [bit/s/Hz] per row of (n, B) path gains.

    Each BS b serves group_sizes[b] users with equal shares of its own
    power; the user behind row i is attached to BS serving[i].  The desired
    signal is Gamma(n_t - K + 1, alpha kappa2 P / K) and intra-cell leakage
    Gamma(K - 1, alpha sigma2 P / K).  An interfering BS with K streams is
    received through the quadratic form (P/K) h^H W W^H h whose mean K and
    variance tr((W^H W)^2) are exact: unit beam norms give the mean, and
    the ZF cross-beam correlation E|w_i^H w_j|^2 = 1/(n_t - K + 2)
    (isotropy of the normalized pseudo-inverse columns, verified by
    sampling) gives the variance, so each cross cell contributes
    Gamma(K (n_t - K + 2)/(n_t + 1), alpha P (n_t + 1)/(K (n_t - K + 2))).
    Treating the K leakage streams as independent unit exponentials would
    keep the mean but understate the variance and bias the rate low in
    interference-limited spots.  All interference terms are moment matched,
    as is the signal-plus-interference total in the first expectation.  By
    isotropy of the ZF directions the result depends on the co-scheduled
    users only through the per-cell counts."""
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    n, n_bs = alphas.shape
    serving = np.broadcast_to(np.asarray(serving, dtype=int), (n,))
    sizes = np.broadcast_to(np.asarray(group_sizes, dtype=int), (n_bs,))
    if np.any(sizes < 0) or np.any(sizes > n_t):
        raise ValueError("per-cell group sizes must lie in [0, n_t]")
    if np.any(sizes[serving] < 1):
        raise ValueError("serving cell must schedule at least one user")
    alpha_own = alphas[np.arange(n), serving]
    k_own = sizes[serving].astype(float)
    sigma2 = np.zeros(n) if perfect_csi else \
        1.0 / (1.0 + alpha_own * n_bs * power)
    kappa2 = 1.0 - sigma2
    mu_sig = n_t - k_own + 1.0
    th_sig = alpha_own * kappa2 * power / k_own
    # interference stack: own-cell residual in the serving slot, cross-cell
    # ZF leakage elsewhere; silent cells (K = 0) drop out as zero shapes
    mu_cross = sizes * (n_t - sizes + 2.0) / (n_t + 1.0)
    mu_int = np.broadcast_to(mu_cross, (n, n_bs)).copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        th_int = np.where(sizes > 0, alphas * power /
                          np.where(sizes > 0, mu_cross, 1.0), 0.0)
    rows = np.arange(n)
    mu_int[rows, serving] = k_own - 1.0
    th_int[rows, serving] = alpha_own * sigma2 * power / k_own
    mu_i, th_i = _moment_match_arrays(mu_int, th_int)
    mu_tot, th_tot = _moment_match_arrays(
        np.concatenate([mu_int, mu_sig[:, None]], axis=-1),
        np.concatenate([th_int, th_sig[:, None]], axis=-1))
    return _elg_arrays(mu_tot, th_tot) - _elg_arrays(mu_i, th_i)


def cst_conditional_rate(alpha_row, group_sizes, serving: int, n_t: int,
                         power: float, perfect_csi: bool = False) -> float:
    """Scalar wrapper of cst_rates for a single user's path-gain row."""
    alpha = np.asarray(alpha_row, dtype=float)
    if alpha.ndim != 1:
        raise ValueError("alpha_row must be a 1D vector of path gains")
    return float(cst_rates(alpha[None, :], np.array([serving]), group_sizes,
                           n_t, power, perfect_csi)[0])
