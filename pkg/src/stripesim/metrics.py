"""Instantaneous SINR, achievable SE, MSE, and the per-AP update identities.

Conventions: `ghat` is the stacked (N*L, K) estimate matrix, `noise_blocks`
the per-AP colored-noise covariances, `powers` the length-K vector of
transmit powers in mW. Combining vectors b apply as b^H z; equivalently a
combiner matrix stores b_k^H in row k.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NumericError, UsageError
from .linalg import cholesky_pd


@dataclass
class MetricsRecord:
    """Per-UE instantaneous metrics of one receiver on one realization."""

    algorithm: str
    sinr: np.ndarray          # (K,) linear
    mse: np.ndarray           # (K,) scale-optimized MSE, p/(1+SINR)
    log_rate: np.ndarray      # (K,) log2(1 + SINR), prelog excluded


def _noise_quadratic(b, noise_blocks):
    """b^H K_L b for a block-diagonal noise covariance."""
    out = 0.0
    offset = 0
    for blk in noise_blocks:
        n = blk.shape[0]
        seg = b[offset:offset + n]
        out += (seg.conj() @ blk @ seg).real
        offset += n
    if offset != b.shape[0]:
        raise UsageError("noise blocks do not match the combiner length")
    return float(out)


def instantaneous_sinr(b, ghat, noise_blocks, powers, k):
    """Effective SINR of UE k for an arbitrary combining vector b."""
    b = np.asarray(b)
    if not np.any(b):
        raise ValueError("instantaneous_sinr: zero combining vector")
    powers = np.asarray(powers, dtype=float)
    cross = np.abs(ghat.conj().T @ b) ** 2                   # |h_i^H b|^2 = |b^H h_i|^2
    signal = powers[k] * cross[k]
    interference = float(powers @ cross - signal)
    noise = _noise_quadratic(b, noise_blocks)
    return float(signal / (interference + noise))


def max_sinr(ghat, noise_blocks, powers, k):
    """Largest achievable effective SINR of UE k over all combining vectors."""
    powers = np.asarray(powers, dtype=float)
    others = np.delete(np.arange(ghat.shape[1]), k)
    cov = sla.block_diag(*noise_blocks).astype(complex)
    cov += (ghat[:, others] * powers[others]) @ ghat[:, others].conj().T
    h_k = ghat[:, k]
    return float(powers[k] * (h_k.conj() @ sla.cho_solve(
        cholesky_pd(cov), h_k, check_finite=False)).real)


def achievable_se(sinr_samples, tau_p, tau_c):
    """Ergodic SE in bit/s/Hz: (1 - tau_p/tau_c) * mean(log2(1 + SINR))."""
    sinr_samples = np.asarray(sinr_samples, dtype=float)
    if sinr_samples.size == 0:
        raise UsageError("achievable_se: empty sample set")
    if tau_p > tau_c:
        raise UsageError("achievable_se: tau_p must not exceed tau_c")
    return float((1.0 - tau_p / tau_c) * np.mean(np.log2(1.0 + sinr_samples)))


def mse_of_combiner(b, hhat_k, lam, p_k):
    """Conditional MSE of UE k when combining with b:
    p - 2 Re{b^H hhat} p + b^H Lambda b."""
    b = np.asarray(b)
    quad = (b.conj() @ lam @ b).real
    return float(p_k - 2.0 * p_k * (b.conj() @ hhat_k).real + quad)


def min_mse(hhat_k, lam, p_k):
    """Smallest conditional MSE of UE k: p - p^2 hhat^H Lambda^{-1} hhat."""
    sol = sla.cho_solve(cholesky_pd(lam), hhat_k, check_finite=False)
    return float(p_k - p_k ** 2 * (hhat_k.conj() @ sol).real)


def prop3_updates(gain, hhat_ap, err_cov_prev, powers, sinr_prev):
    """Per-AP incremental updates of MSE, SINR, and SE along a sequential run.

    mse_drop  alpha = diag(gain Hhat P_prev)     (>= 0 up to roundoff)
    mse       e'    = e - alpha, with e = p/(1 + sinr_prev)
    sinr_gain gamma = alpha (sinr_prev+1)^2 / (p - alpha (sinr_prev+1))
    se_gain   zeta  = log2(1 + gamma / (1 + sinr_prev))

    Values of alpha in the negative roundoff band are clamped to zero so the
    recursion is exactly monotone; a denominator <= 0 beyond roundoff raises
    NumericError.
    """
    powers = np.asarray(powers, dtype=float)
    sinr_prev = np.asarray(sinr_prev, dtype=float)
    prod = gain @ hhat_ap
    mse_drop = np.einsum("kn,nk->k", prod, err_cov_prev).real
    roundoff = 64.0 * np.finfo(float).eps * np.einsum(
        "kn,nk->k", np.abs(prod), np.abs(err_cov_prev)
    )
    mse_drop = np.where((mse_drop < 0) & (mse_drop > -roundoff), 0.0, mse_drop)

    mse_prev = powers / (1.0 + sinr_prev)
    mse = mse_prev - mse_drop
    denom = powers - mse_drop * (sinr_prev + 1.0)
    if np.any(denom <= 0):
        raise NumericError("prop3_updates: nonpositive SINR-update denominator")
    sinr_gain = mse_drop * (sinr_prev + 1.0) ** 2 / denom
    sinr = sinr_prev + sinr_gain
    se_gain = np.log2(1.0 + sinr_gain / (1.0 + sinr_prev))
    return mse_drop, mse, sinr_gain, sinr, se_gain


def combiner_sinrs(combiner, ghat, noise_blocks, powers):
    """Vectorized effective SINRs for all UEs of one combiner matrix."""
    powers = np.asarray(powers, dtype=float)
    cross = np.abs(combiner @ ghat) ** 2                       # (K, K), [k,i]=|b_k^H h_i|^2
    signal = powers * np.diag(cross)
    interference = cross @ powers - signal
    noise = np.zeros(combiner.shape[0])
    offset = 0
    for blk in noise_blocks:
        n = blk.shape[0]
        seg = combiner[:, offset:offset + n]
        noise += np.einsum("km,mn,kn->k", seg, blk, seg.conj()).real
        offset += n
    return signal / (interference + noise)


def evaluate_combiner(output, ghat, noise_blocks, powers):
    """MetricsRecord (SINR, duality MSE, log-rate) for a receiver output."""
    sinr = combiner_sinrs(output.combiner, ghat, noise_blocks, powers)
    powers = np.asarray(powers, dtype=float)
    return MetricsRecord(
        algorithm=output.algorithm,
        sinr=sinr,
        mse=powers / (1.0 + sinr),
        log_rate=np.log2(1.0 + sinr),
    )
