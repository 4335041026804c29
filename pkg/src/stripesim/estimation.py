"""Pilot assignment, despreaded pilot observations, and MMSE channel estimation.

Pilot observations are generated directly in despreaded form

    y_tl = sum_{i in S_t} sqrt(p_i * tau_p) h_il + n_tl,   n_tl ~ CN(0, sigma2 I)

which is statistically identical to receiving the full N x tau_p pilot block
and despreading it; the full-matrix path is kept for an equivalence test.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .linalg import complex_normal, herm, solve_hermitian


@dataclass
class PilotAssignment:
    """Pilot index per UE (0-based) and the induced co-pilot sets."""

    pilot_of: np.ndarray     # (K,) ints in [0, tau_p)
    tau_p: int

    def copilots(self, k):
        """Indices of all UEs sharing UE k's pilot (includes k)."""
        return np.flatnonzero(self.pilot_of == self.pilot_of[k])

    def users_of_pilot(self, t):
        return np.flatnonzero(self.pilot_of == t)


@dataclass
class EstimationStatistics:
    """Fade-independent estimation quantities for one drop."""

    pilot_cov: np.ndarray    # (tau_p, L, N, N)  Psi, despreaded-observation covariance
    filt: np.ndarray         # (K, L, N, N)  MMSE filter, hhat = filt @ y
    est_cov: np.ndarray      # (K, L, N, N)  covariance of the estimate
    err_cov: np.ndarray      # (K, L, N, N)  covariance of the estimation error
    noise_cov: np.ndarray    # (L, N, N)  colored data-noise covariance Sigma_l


@dataclass
class EstimationResult:
    """Estimates and statistics for one coherence block."""

    hhat: np.ndarray         # (K, L, N)
    yp: np.ndarray           # (tau_p, L, N) despreaded pilot observations
    stats: EstimationStatistics


def assign_pilots(n_ue, tau_p, beta, scheme="greedy"):
    """Assign pilots to UEs.

    "roundrobin": UE k gets pilot k mod tau_p. "greedy": the first tau_p UEs
    get distinct pilots; every remaining UE, in decreasing order of its best
    large-scale gain, takes the pilot whose current co-users inflict the
    least summed gain at that UE's strongest AP.
    """
    if tau_p < 1:
        raise UsageError("assign_pilots: tau_p must be >= 1")
    beta = np.asarray(beta, dtype=float)
    if scheme == "roundrobin":
        return PilotAssignment(np.arange(n_ue) % tau_p, tau_p)
    if scheme != "greedy":
        raise UsageError(f"assign_pilots: unknown scheme {scheme!r}")

    pilot_of = np.full(n_ue, -1, dtype=int)
    head = min(n_ue, tau_p)
    pilot_of[:head] = np.arange(head)
    if n_ue > tau_p:
        rest = np.arange(tau_p, n_ue)
        order = rest[np.argsort(-beta[rest].max(axis=1), kind="stable")]
        for k in order:
            strongest_ap = int(np.argmax(beta[k]))
            load = np.zeros(tau_p)
            for t in range(tau_p):
                co = np.flatnonzero(pilot_of == t)
                load[t] = beta[co, strongest_ap].sum()
            pilot_of[k] = int(np.argmin(load))
    return PilotAssignment(pilot_of, tau_p)


def despread_pilots(channels, assignment, powers_mw, noise_mw, rng):
    """Despreaded pilot observations y_tl for every pilot t and AP l.

    Returns an array of shape (tau_p, L, N). Noise is independent across
    (t, l), consistent with orthogonal pilots.
    """
    n_ap, n_ant, n_ue = channels.H.shape
    tau_p = assignment.tau_p
    mix = np.zeros((tau_p, n_ue))
    mix[assignment.pilot_of, np.arange(n_ue)] = np.sqrt(powers_mw * tau_p)
    signal = np.einsum("tk,lnk->tln", mix, channels.H)
    noise = np.sqrt(noise_mw) * complex_normal(rng, (tau_p, n_ap, n_ant))
    return signal + noise


def pilot_matrix(tau_p):
    """tau_p mutually orthogonal pilots (columns), each with squared norm tau_p."""
    grid = np.arange(tau_p)
    return np.exp(-2j * np.pi * np.outer(grid, grid) / tau_p)


def receive_pilot_block(channels, assignment, powers_mw, noise_mw, rng):
    """Full N x tau_p received pilot block per AP (debug path).

    Despreading this block with pilot_matrix reproduces despread_pilots up to
    the noise realization.
    """
    n_ap, n_ant, n_ue = channels.H.shape
    tau_p = assignment.tau_p
    phi = pilot_matrix(tau_p)
    scaled = np.sqrt(powers_mw)[None, None, :] * channels.H       # (L, N, K)
    blocks = np.einsum("lnk,ku->lnu", scaled, phi[assignment.pilot_of, :])
    blocks = blocks + np.sqrt(noise_mw) * complex_normal(rng, (n_ap, n_ant, tau_p))
    return blocks


def despread_pilot_block(blocks, tau_p):
    """Apply y_tl = Y_l phi_t^* / sqrt(tau_p) to a full pilot block."""
    phi = pilot_matrix(tau_p)
    return np.einsum("lnu,tu->tln", blocks, phi.conj()) / np.sqrt(tau_p)


def pilot_covariances(stats, assignment, powers_mw, noise_mw):
    """Covariance Psi_tl of the despreaded observation for every (t, l)."""
    n_ue, n_ap, n_ant = stats.corr.shape[:3]
    tau_p = assignment.tau_p
    psi = np.zeros((tau_p, n_ap, n_ant, n_ant), dtype=complex)
    psi[...] = noise_mw * np.eye(n_ant)
    for k in range(n_ue):
        psi[assignment.pilot_of[k]] += tau_p * powers_mw[k] * stats.corr[k]
    return psi


def mmse_estimate(y, corr_copilots, powers_copilots, k_index, tau_p, noise_mw):
    """MMSE channel estimate of one UE from a despreaded pilot observation.

    corr_copilots holds the correlation matrices of all UEs in the co-pilot
    set (in any order), powers_copilots their transmit powers, and k_index
    the target UE's position within that set. Returns (hhat, est_cov,
    err_cov) with est_cov + err_cov == corr exactly.
    """
    corr_copilots = np.asarray(corr_copilots)
    powers_copilots = np.asarray(powers_copilots, dtype=float)
    n_ant = corr_copilots.shape[-1]
    psi = noise_mw * np.eye(n_ant) + np.einsum(
        "s,smn->mn", tau_p * powers_copilots, corr_copilots
    )
    corr_k = corr_copilots[k_index]
    p_k = powers_copilots[k_index]
    gain = np.sqrt(p_k * tau_p)
    psi_inv_corr = solve_hermitian(psi, corr_k)
    hhat = gain * psi_inv_corr.conj().T @ y
    est_cov = herm(p_k * tau_p * corr_k @ psi_inv_corr)
    err_cov = corr_k - est_cov
    return hhat, est_cov, err_cov


def colored_noise_cov(err_covs, powers_mw, noise_mw):
    """Data-noise covariance at one AP: sum_i p_i * err_cov_i + sigma2 * I."""
    err_covs = np.asarray(err_covs)
    n_ant = err_covs.shape[-1]
    return herm(np.einsum("k,kmn->mn", np.asarray(powers_mw, float), err_covs)
                + noise_mw * np.eye(n_ant))


def estimation_statistics(stats, assignment, powers_mw, noise_mw):
    """All fade-independent estimation matrices for a drop."""
    n_ue, n_ap, n_ant = stats.corr.shape[:3]
    psi = pilot_covariances(stats, assignment, powers_mw, noise_mw)
    filt = np.empty_like(stats.corr)
    est_cov = np.empty_like(stats.corr)
    for k in range(n_ue):
        t = assignment.pilot_of[k]
        gain = np.sqrt(powers_mw[k] * assignment.tau_p)
        for l in range(n_ap):
            psi_inv_corr = solve_hermitian(psi[t, l], stats.corr[k, l])
            filt[k, l] = gain * psi_inv_corr.conj().T
            est_cov[k, l] = herm(gain * stats.corr[k, l] @ psi_inv_corr * gain)
    err_cov = stats.corr - est_cov
    noise_cov = np.empty((n_ap, n_ant, n_ant), dtype=complex)
    for l in range(n_ap):
        noise_cov[l] = colored_noise_cov(err_cov[:, l], powers_mw, noise_mw)
    return EstimationStatistics(psi, filt, est_cov, err_cov, noise_cov)


def estimate_channels(est_stats, assignment, yp):
    """Apply the per-(k, l) MMSE filters to despreaded observations."""
    y_per_ue = yp[assignment.pilot_of]                     # (K, L, N)
    return np.einsum("klmn,kln->klm", est_stats.filt, y_per_ue)


def run_estimation(stats, assignment, powers_mw, noise_mw, channels, rng,
                   est_stats=None):
    """Despread pilots and estimate every channel for one coherence block."""
    if est_stats is None:
        est_stats = estimation_statistics(stats, assignment, powers_mw, noise_mw)
    yp = despread_pilots(channels, assignment, powers_mw, noise_mw, rng)
    hhat = estimate_channels(est_stats, assignment, yp)
    return EstimationResult(hhat=hhat, yp=yp, stats=est_stats)
