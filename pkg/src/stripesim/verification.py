"""Randomized verification of the algebraic identities behind the receivers.

Each check runs on small random instances (imperfect CSI, random correlation
matrices) and records its worst observed error against a pinned tolerance:

  theorem1_equivalence   sequential optimal output == centralized LMMSE
  ordering_invariance    final output unchanged under AP permutations
  monotonicity           per-AP SINR nondecreasing, MSE nonincreasing
  mse_sinr_duality       e == p / (1 + SINR) between closed forms
  prop3_consistency      incremental updates match direct recomputation
  alt_oslp_equivalence   semi-distributed variant == sequential variant
  smr_identity           accumulated MR == single-shot stacked MR
  covariance_identities  estimation covariance decompositions
  block_inverse_identity Schur blockwise inverse == dense inverse

A failing check records the instance index that reproduces it. The
`perturb` flag injects noise into the sequential error covariance and is
expected to break theorem1_equivalence (negative control).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError
from .estimation import PilotAssignment, despread_pilots, estimation_statistics, \
    estimate_channels
from .geometry import ChannelRealization, ChannelStatistics
from .linalg import assemble_block2, block2_inverse, complex_normal, herm, min_eigh, \
    psd_sqrt
from .metrics import max_sinr, min_mse, prop3_updates
from .receivers import APLocalData, alt_oslp_run, centralized_lmmse, oslp_run, \
    sequential_mr, stack_estimates, stack_observations

TOLERANCES = {
    "theorem1_equivalence": 1e-9,
    "ordering_invariance": 1e-9,
    "monotonicity": 1e-12,
    "mse_sinr_duality": 1e-12,
    "prop3_consistency": 1e-9,
    "alt_oslp_equivalence": 1e-9,
    "smr_identity": 1e-12,
    "covariance_identities": 1e-10,
    "block_inverse_identity": 1e-10,
}


@dataclass
class CheckOutcome:
    name: str
    tolerance: float
    worst_error: float = 0.0
    failing_instances: list = field(default_factory=list)

    @property
    def passed(self):
        return self.worst_error <= self.tolerance and not self.failing_instances

    def update(self, error, instance_seed):
        error = float(error)
        if error > self.worst_error:
            self.worst_error = error
        if error > self.tolerance:
            self.failing_instances.append(instance_seed)


@dataclass
class VerificationReport:
    seed: int
    n_instances: int
    perturb: bool
    checks: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks.values())

    def as_dict(self):
        return {
            "seed": self.seed,
            "n_instances": self.n_instances,
            "perturb": self.perturb,
            "passed": self.passed,
            "checks": {
                name: {
                    "passed": c.passed,
                    "tolerance": c.tolerance,
                    "worst_error": c.worst_error,
                    "failing_instances": c.failing_instances,
                }
                for name, c in self.checks.items()
            },
        }

    def lines(self):
        out = []
        for name, c in self.checks.items():
            status = "PASS" if c.passed else "FAIL"
            line = f"{status}  {name:24s} worst {c.worst_error:.3e}  tol {c.tolerance:.1e}"
            if c.failing_instances:
                line += f"  failing instances {c.failing_instances[:5]}"
            out.append(line)
        return out


def random_correlation(rng, n_ant, beta):
    """Random Hermitian PSD matrix with trace/N equal to beta."""
    a = complex_normal(rng, (n_ant, n_ant + 2))
    r = herm(a @ a.conj().T)
    r *= beta * n_ant / np.trace(r).real
    return r


def random_instance(rng, l_max=6, n_max=4, k_max=8, force_l=None):
    """Small random scenario with imperfect CSI.

    Returns a dict with the statistics, one channel/pilot/data realization,
    the per-AP local data, and the pieces the checks need.
    """
    n_ap = int(force_l) if force_l else int(rng.integers(1, l_max + 1))
    n_ant = int(rng.integers(1, n_max + 1))
    n_ue = int(rng.integers(1, k_max + 1))
    tau_p = int(rng.integers(1, n_ue + 1))
    powers = rng.uniform(0.5, 2.0, n_ue)
    noise_mw = float(rng.uniform(0.25, 1.0))

    beta = rng.uniform(0.2, 2.0, (n_ue, n_ap))
    corr = np.empty((n_ue, n_ap, n_ant, n_ant), dtype=complex)
    sqrt = np.empty_like(corr)
    for k in range(n_ue):
        for l in range(n_ap):
            corr[k, l] = random_correlation(rng, n_ant, beta[k, l])
            sqrt[k, l] = psd_sqrt(corr[k, l])
    stats = ChannelStatistics(corr=corr, beta=beta, corr_sqrt=sqrt)
    assignment = PilotAssignment(
        np.asarray(rng.integers(0, tau_p, n_ue)), tau_p)
    # Guarantee every pilot index below tau_p can occur; no constraint needed.

    channels = ChannelRealization(
        H=np.einsum("klmn,kln->lmk", sqrt, complex_normal(rng, (n_ue, n_ap, n_ant))))
    est_stats = estimation_statistics(stats, assignment, powers, noise_mw)
    yp = despread_pilots(channels, assignment, powers, noise_mw, rng)
    hhat = estimate_channels(est_stats, assignment, yp)

    s_true = np.sqrt(powers) * complex_normal(rng, n_ue)
    ap_data = []
    for l in range(n_ap):
        w = np.sqrt(noise_mw) * complex_normal(rng, n_ant)
        y = channels.H[l] @ s_true + w
        ap_data.append(APLocalData(
            Hhat=np.ascontiguousarray(hhat[:, l, :].T),
            Sigma=est_stats.noise_cov[l], y=y))
    return {
        "dims": (n_ap, n_ant, n_ue),
        "powers": powers,
        "noise_mw": noise_mw,
        "stats": stats,
        "assignment": assignment,
        "est_stats": est_stats,
        "ap_data": ap_data,
        "ghat": stack_estimates(ap_data),
        "noise_blocks": list(est_stats.noise_cov),
    }


def _rel(num, den, floor=1e-300):
    return float(num) / max(float(den), floor)


def _check_theorem1(inst, out_seq, out_cent, outcome, idx):
    shat_err = np.linalg.norm(out_seq.shat - out_cent.shat)
    shat_ref = np.linalg.norm(out_cent.shat)
    cov_err = np.linalg.norm(out_seq.err_cov - out_cent.err_cov)
    cov_ref = np.linalg.norm(np.diag(inst["powers"]))
    outcome.update(max(_rel(shat_err, shat_ref), _rel(cov_err, cov_ref)), idx)


def _check_ordering(inst, out_seq, rng, outcome, idx, n_perms=5):
    ref_shat, ref_cov = out_seq.shat, out_seq.err_cov
    cov_ref = np.linalg.norm(np.diag(inst["powers"]))
    for _ in range(n_perms):
        perm = rng.permutation(len(inst["ap_data"]))
        out = oslp_run([inst["ap_data"][j] for j in perm], inst["powers"])
        err = max(
            _rel(np.linalg.norm(out.shat - ref_shat), np.linalg.norm(ref_shat)),
            _rel(np.linalg.norm(out.err_cov - ref_cov), cov_ref),
        )
        outcome.update(err, idx)


def _check_sequential_identities(inst, out_seq, report, idx):
    """Monotonicity, duality, and incremental-update consistency along one run."""
    powers = inst["powers"]
    ap_data = inst["ap_data"]
    noise_blocks = inst["noise_blocks"]
    mono = report["monotonicity"]
    dual = report["mse_sinr_duality"]
    prop = report["prop3_consistency"]

    sinr = np.zeros(len(powers))
    err_prev = np.diag(powers).astype(complex)
    for l, (ap, rec) in enumerate(zip(ap_data, out_seq.trace)):
        try:
            mse_drop, mse, sinr_gain, sinr, se_gain = prop3_updates(
                rec.gain, ap.Hhat, err_prev, powers, sinr)
        except NumericError:
            prop.update(np.inf, idx)
            return
        # Monotone per AP: MSE never increases, SINR never decreases.
        mono.update(max(float(np.max(-mse_drop)), float(np.max(-sinr_gain)),
                        float(np.max(-se_gain))), idx)
        # P_{l-1} - P_l must stay PSD up to roundoff.
        mono.update(max(0.0, -min_eigh(err_prev - rec.err_cov)), idx)

        # Incremental MSE equals the live covariance diagonal.
        diag = np.diag(rec.err_cov).real
        prop.update(float(np.max(np.abs(mse - diag) / powers)), idx)

        # Incremental SINR equals the closed-form optimum on the first l APs.
        ghat_l = stack_estimates(ap_data[:l + 1])
        for k in range(len(powers)):
            direct = max_sinr(ghat_l, noise_blocks[:l + 1], powers, k)
            prop.update(abs(sinr[k] - direct) / (1.0 + direct), idx)
            dual.update(
                abs(mse[k] - powers[k] / (1.0 + direct)) / powers[k], idx)
        err_prev = rec.err_cov

    # Duality between the two closed forms at the full stripe.
    lam = _dense_lambda(inst)
    for k in range(len(powers)):
        gmax = max_sinr(inst["ghat"], noise_blocks, powers, k)
        emin = min_mse(inst["ghat"][:, k], lam, powers[k])
        dual.update(abs(emin - powers[k] / (1.0 + gmax)) / powers[k], idx)


def _dense_lambda(inst):
    from .receivers import build_lambda
    return build_lambda(inst["ghat"], inst["noise_blocks"], inst["powers"])


def _check_alt(inst, out_seq, outcome, idx):
    out_alt = alt_oslp_run(inst["ap_data"], inst["powers"])
    err = _rel(np.linalg.norm(out_alt.shat - out_seq.shat),
               np.linalg.norm(out_seq.shat))
    outcome.update(err, idx)


def _check_smr(inst, outcome, idx):
    out = sequential_mr(inst["ap_data"])
    z = stack_observations(inst["ap_data"])
    single_shot = inst["ghat"].conj().T @ z
    scale = sum(np.linalg.norm(ap.Hhat.conj().T @ ap.y) for ap in inst["ap_data"])
    outcome.update(_rel(np.linalg.norm(out.shat - single_shot), scale), idx)


def _check_covariances(inst, outcome, idx):
    est = inst["est_stats"]
    stats = inst["stats"]
    noise_mw = inst["noise_mw"]
    powers = inst["powers"]
    # Estimate/error covariances tile the prior exactly.
    err = np.max(np.abs(est.est_cov + est.err_cov - stats.corr))
    outcome.update(_rel(err, np.max(np.abs(stats.corr))), idx)
    # Colored noise reconstructs from the error covariances, floor at sigma2.
    for l in range(len(est.noise_cov)):
        rebuilt = np.einsum("k,kmn->mn", powers, est.err_cov[:, l]) \
            + noise_mw * np.eye(stats.corr.shape[-1])
        outcome.update(
            _rel(np.max(np.abs(rebuilt - est.noise_cov[l])), noise_mw), idx)
        outcome.update(max(0.0, _rel(noise_mw - min_eigh(est.noise_cov[l]),
                                     noise_mw)), idx)
        for t in range(est.pilot_cov.shape[0]):
            outcome.update(
                max(0.0, _rel(noise_mw - min_eigh(est.pilot_cov[t, l]), noise_mw)),
                idx)


def _check_block_inverse(rng, outcome, idx):
    na, nb = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    m = complex_normal(rng, (na + nb, na + nb))
    m = herm(m @ m.conj().T) + (na + nb) * np.eye(na + nb)
    blocks = block2_inverse(m[:na, :na], m[:na, na:], m[na:, :na], m[na:, na:])
    dense = np.linalg.inv(m)
    err = np.linalg.norm(assemble_block2(*blocks) - dense)
    outcome.update(_rel(err, np.linalg.norm(dense)), idx)


def verify(n_instances=200, seed=0, perturb=False, l_max=6, n_max=4, k_max=8):
    """Run every check on n_instances random scenarios.

    With perturb=True only the theorem-1 check runs (on a corrupted
    sequential recursion); it is expected to fail.
    """
    if perturb:
        checks = {"theorem1_equivalence":
                  CheckOutcome("theorem1_equivalence",
                               TOLERANCES["theorem1_equivalence"])}
    else:
        checks = {name: CheckOutcome(name, tol) for name, tol in TOLERANCES.items()}
    for idx in range(n_instances):
        rng = np.random.default_rng(np.random.SeedSequence((seed, idx)))
        # Instance 0 pins the single-AP base case.
        inst = random_instance(rng, l_max, n_max, k_max,
                               force_l=1 if idx == 0 else None)
        perturb_scale = 1e-3 if perturb else 0.0
        out_seq = oslp_run(inst["ap_data"], inst["powers"], record_trace=True,
                           perturb=perturb_scale, rng=rng)
        out_cent = centralized_lmmse(
            inst["ghat"], inst["noise_blocks"], inst["powers"],
            z=stack_observations(inst["ap_data"]))

        _check_theorem1(inst, out_seq, out_cent, checks["theorem1_equivalence"], idx)
        if perturb:
            continue
        _check_ordering(inst, out_seq, rng, checks["ordering_invariance"], idx)
        _check_sequential_identities(inst, out_seq, checks, idx)
        _check_alt(inst, out_seq, checks["alt_oslp_equivalence"], idx)
        _check_smr(inst, checks["smr_identity"], idx)
        _check_covariances(inst, checks["covariance_identities"], idx)
        _check_block_inverse(rng, checks["block_inverse_identity"], idx)
    return VerificationReport(seed=seed, n_instances=n_instances,
                              perturb=perturb, checks=checks)
