"""Uplink combining algorithms for the sequential (radio stripe) fronthaul.

All receivers are built once per coherence block from the channel estimates
and noise statistics, then applied to any number of data channel uses: the
`y` field of APLocalData may be a single use (N,), a block of uses (N, T),
or None to build combiners only.

Every algorithm tracks its effective end-to-end combiner, the K x (N*L)
matrix whose k-th row, applied to the stacked observation of all APs,
reproduces the k-th UE's final estimate. SE/MSE evaluation runs off this
matrix (see metrics).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import NumericError, UsageError
from .linalg import cholesky_pd, herm, complex_normal


@dataclass
class APLocalData:
    """What one AP knows in one coherence block."""

    Hhat: np.ndarray          # (N, K) channel estimates
    Sigma: np.ndarray         # (N, N) colored-noise covariance
    y: np.ndarray | None = None   # (N,) or (N, T) received data, optional


@dataclass
class SequentialState:
    """Running state of a sequential receiver after some number of APs.

    The accumulator fields (quad_sum, mr_sum) are used only by the
    semi-distributed variant; combiner is grown block by block.
    """

    shat: np.ndarray | None
    err_cov: np.ndarray | None
    combiner: np.ndarray | None = None
    quad_sum: np.ndarray | None = None
    mr_sum: np.ndarray | None = None
    n_aps: int = 0


@dataclass
class StepRecord:
    """Per-AP quantities recorded during a sequential run (for verification)."""

    gain: np.ndarray          # (K, N) update gain at this AP
    err_cov: np.ndarray       # (K, K) error covariance after this AP
    mse_drop: np.ndarray      # (K,) diagonal decrease of the error covariance


@dataclass
class ReceiverOutput:
    algorithm: str
    shat: np.ndarray | None
    err_cov: np.ndarray | None
    combiner: np.ndarray | None
    trace: list = field(default_factory=list)


def _check_ap_data(ap_data):
    if len(ap_data) == 0:
        raise UsageError("receivers: empty AP list")
    n_ue = ap_data[0].Hhat.shape[1]
    for ap in ap_data:
        if ap.Hhat.shape[1] != n_ue or ap.Sigma.shape != (ap.Hhat.shape[0],) * 2:
            raise UsageError("receivers: inconsistent AP data dimensions")
    return n_ue


def stack_estimates(ap_data):
    """Stacked (N*L, K) channel-estimate matrix across all APs."""
    return np.concatenate([ap.Hhat for ap in ap_data], axis=0)


def stack_observations(ap_data):
    if any(ap.y is None for ap in ap_data):
        raise UsageError("receivers: observations requested but some AP has y=None")
    return np.concatenate([ap.y for ap in ap_data], axis=0)


def build_lambda(ghat, noise_blocks, powers):
    """Dense covariance of the stacked observation, K_L + Ghat Q Ghat^H."""
    lam = sla.block_diag(*noise_blocks).astype(complex)
    lam += (ghat * np.asarray(powers, float)) @ ghat.conj().T
    return herm(lam)


def centralized_lmmse(ghat, noise_blocks, powers, z=None):
    """LMMSE combining on the fully stacked observation.

    Returns the combining matrix as the effective combiner, the error
    covariance Q - V Ghat Q, and (when z is given) the signal estimate.
    Solved by Cholesky factorization, never explicit inversion.
    """
    powers = np.asarray(powers, dtype=float)
    lam = build_lambda(ghat, noise_blocks, powers)
    lam_inv_ghat = sla.cho_solve(cholesky_pd(lam), ghat, check_finite=False)
    combiner = powers[:, None] * lam_inv_ghat.conj().T            # Q Ghat^H Lam^{-1}
    err_cov = herm(np.diag(powers) - (combiner @ ghat) * powers)
    shat = combiner @ z if z is not None else None
    return ReceiverOutput("cent", shat, err_cov, combiner)


def oslp_init(powers, n_uses=None):
    """State before any AP: zero estimate, prior covariance diag(powers)."""
    powers = np.asarray(powers, dtype=float)
    n_ue = powers.size
    if n_uses is None:
        shat = None
    elif n_uses == 0:
        shat = np.zeros(n_ue, dtype=complex)
    else:
        shat = np.zeros((n_ue, n_uses), dtype=complex)
    return SequentialState(
        shat=shat,
        err_cov=np.diag(powers).astype(complex),
        combiner=np.zeros((n_ue, 0), dtype=complex),
    )


def oslp_step(state, hhat, sigma, y=None, perturb=0.0, rng=None):
    """One measurement update of the MMSE-optimal sequential receiver.

    gain  = P Hhat^H (Sigma + Hhat P Hhat^H)^{-1}
    shat' = shat + gain (y - Hhat shat)
    P'    = (I - gain Hhat) P, re-Hermitized

    `perturb` injects Hermitian noise of that relative size into P' (fault
    injection used by the verification negative control).
    """
    p_prev = state.err_cov
    if hhat.shape[1] != p_prev.shape[0]:
        raise UsageError("oslp_step: AP data dimensions do not match the state")
    hp = hhat @ p_prev                                            # (N, K)
    innov_cov = herm(sigma + hp @ hhat.conj().T)
    gain = sla.cho_solve(cholesky_pd(innov_cov), hp, check_finite=False).conj().T
    shrink = np.eye(p_prev.shape[0]) - gain @ hhat
    err_cov = herm(shrink @ p_prev)
    if perturb:
        if rng is None:
            raise UsageError("oslp_step: perturb requires an rng")
        noise = herm(complex_normal(rng, err_cov.shape))
        err_cov = err_cov + perturb * np.linalg.norm(err_cov) * noise

    shat = state.shat
    if y is not None:
        if shat is None:
            shat = np.zeros(p_prev.shape[:1] + y.shape[1:], dtype=complex)
        shat = shat + gain @ (y - hhat @ shat)
    combiner = None
    if state.combiner is not None:
        combiner = np.concatenate([shrink @ state.combiner, gain], axis=1)
    return SequentialState(shat=shat, err_cov=err_cov, combiner=combiner,
                           n_aps=state.n_aps + 1)


def oslp_run(ap_data, powers, record_trace=False, perturb=0.0, rng=None):
    """Fold the optimal sequential update over all APs in order."""
    _check_ap_data(ap_data)
    state = oslp_init(powers)
    trace = []
    for ap in ap_data:
        prev_diag = np.diag(state.err_cov).real
        state = oslp_step(state, ap.Hhat, ap.Sigma, ap.y, perturb=perturb, rng=rng)
        if record_trace:
            n_ant = ap.Hhat.shape[0]
            gain = state.combiner[:, -n_ant:]
            trace.append(StepRecord(
                gain=gain,
                err_cov=state.err_cov,
                mse_drop=prev_diag - np.diag(state.err_cov).real,
            ))
    return ReceiverOutput("oslp", state.shat, state.err_cov, state.combiner, trace)


def alt_oslp_run(ap_data, powers):
    """Semi-distributed variant: accumulate per-AP quadratic forms and
    noise-weighted MR sums, fuse once at the end.

    quad_sum = sum_l Hhat_l^H Sigma_l^{-1} Hhat_l      (once per block)
    mr_sum   = sum_l Hhat_l^H Sigma_l^{-1} y_l         (per channel use)
    shat     = (Q^{-1} + quad_sum)^{-1} mr_sum

    Algebraically identical to the sequential run; only the message schedule
    differs.
    """
    n_ue = _check_ap_data(ap_data)
    powers = np.asarray(powers, dtype=float)
    quad_sum = np.zeros((n_ue, n_ue), dtype=complex)
    mr_sum = None
    weighted = []                                   # Hhat_l^H Sigma_l^{-1} blocks
    for ap in ap_data:
        w = sla.cho_solve(cholesky_pd(ap.Sigma), ap.Hhat, check_finite=False).conj().T
        weighted.append(w)
        quad_sum += w @ ap.Hhat
        if ap.y is not None:
            term = w @ ap.y
            mr_sum = term if mr_sum is None else mr_sum + term
    fuse = herm(np.diag(1.0 / powers) + quad_sum)
    fuse_cho = cholesky_pd(fuse)
    combiner = sla.cho_solve(fuse_cho, np.concatenate(weighted, axis=1),
                             check_finite=False)
    err_cov = herm(sla.cho_solve(fuse_cho, np.eye(n_ue), check_finite=False))
    shat = None
    if mr_sum is not None:
        shat = sla.cho_solve(fuse_cho, mr_sum, check_finite=False)
    return ReceiverOutput("altoslp", shat, err_cov, combiner)


def sequential_mr(ap_data):
    """Maximum-ratio accumulation: each AP adds Hhat_l^H y_l to the estimate."""
    _check_ap_data(ap_data)
    shat = None
    blocks = []
    for ap in ap_data:
        blocks.append(ap.Hhat.conj().T)
        if ap.y is not None:
            term = ap.Hhat.conj().T @ ap.y
            shat = term if shat is None else shat + term
    return ReceiverOutput("smr", shat, None, np.concatenate(blocks, axis=1))


def n_lmmse_run(ap_data, powers):
    """Per-UE normalized sequential LMMSE.

    Each AP re-estimates UE k from the scalar previous estimate stacked on
    its own observation, using the effective channel of the previous
    estimate and its scalar noise variance as side information. Suboptimal:
    later APs only see one scalar per UE instead of the full state.
    """
    n_ue = _check_ap_data(ap_data)
    powers = np.asarray(powers, dtype=float)
    first = ap_data[0]
    n_ant = first.Hhat.shape[0]

    def local_receivers(aug_chan, aug_noise):
        # aug_chan (K, M, K), aug_noise (K, M, M): batched per-UE LMMSE vectors
        cov = aug_noise + np.einsum(
            "kmi,i,kni->kmn", aug_chan, powers, aug_chan.conj()
        )
        targets = np.einsum("kmk->km", aug_chan)[..., None]       # own column
        vecs = np.linalg.solve(cov, targets)[..., 0]
        return powers[:, None] * vecs                             # (K, M)

    # AP 1: ordinary local LMMSE for every UE on the raw observation.
    aug_chan = np.broadcast_to(first.Hhat, (n_ue, n_ant, n_ue)).copy()
    aug_noise = np.broadcast_to(first.Sigma, (n_ue, n_ant, n_ant)).copy()
    vecs = local_receivers(aug_chan, aug_noise)
    shat = np.einsum("kn,n...->k...", vecs.conj(), first.y) if first.y is not None else None
    combiner = vecs.conj().copy()                                 # rows store v_k^H
    eff_chan = np.einsum("kn,knj->kj", vecs.conj(), aug_chan)     # (K, K)
    eff_var = np.einsum("kn,knm,km->k", vecs.conj(), aug_noise, vecs).real

    for ap in ap_data[1:]:
        n_ant = ap.Hhat.shape[0]
        m = 1 + n_ant
        aug_chan = np.empty((n_ue, m, n_ue), dtype=complex)
        aug_chan[:, 0, :] = eff_chan
        aug_chan[:, 1:, :] = ap.Hhat
        aug_noise = np.zeros((n_ue, m, m), dtype=complex)
        aug_noise[:, 0, 0] = eff_var
        aug_noise[:, 1:, 1:] = ap.Sigma
        vecs = local_receivers(aug_chan, aug_noise)               # (K, 1+N)
        if shat is not None:
            stacked = np.concatenate([shat[:, None, ...],
                                      np.broadcast_to(ap.y, (n_ue,) + ap.y.shape)],
                                     axis=1)
            shat = np.einsum("km,km...->k...", vecs.conj(), stacked)
        combiner = np.concatenate(
            [vecs[:, :1].conj() * combiner, vecs[:, 1:].conj()], axis=1
        )
        eff_chan = np.einsum("km,kmj->kj", vecs.conj(), aug_chan)
        eff_var = np.einsum("km,kmn,kn->k", vecs.conj(), aug_noise, vecs).real

    return ReceiverOutput("nlmmse", shat, None, combiner)


def rls_run(ap_data, delta, noise_floor=1.0):
    """Recursive regularized least squares (sequential zero forcing).

    The optimal sequential recursion executed without statistical priors:
    initial state delta^{-1} I and a scaled identity in place of the colored
    noise covariance at every AP. As delta -> 0 with enough antennas this
    reproduces the ZF solution regardless of noise_floor, which only
    rescales the effective ridge (delta * noise_floor); campaigns pass the
    receiver noise power so the recursion runs on noise-normalized
    observations.
    """
    if delta <= 0 or noise_floor <= 0:
        raise UsageError("rls_run: delta and noise_floor must be > 0")
    n_ue = _check_ap_data(ap_data)
    state = SequentialState(
        shat=None,
        err_cov=np.eye(n_ue, dtype=complex) / delta,
        combiner=np.zeros((n_ue, 0), dtype=complex),
    )
    for ap in ap_data:
        eye = noise_floor * np.eye(ap.Hhat.shape[0])
        state = oslp_step(state, ap.Hhat, eye, ap.y)
    return ReceiverOutput("rls", state.shat, state.err_cov, state.combiner)


def effective_combiner(output):
    """Rows b_k^H of the tracked end-to-end combiner; b_k applies to the
    stacked observation."""
    if output.combiner is None:
        raise UsageError(f"{output.algorithm}: effective combiner was not tracked")
    return output.combiner


def apply_combiner(output, ap_data):
    """Reproduce the final estimate from the effective combiner and stacked data."""
    return effective_combiner(output) @ stack_observations(ap_data)
