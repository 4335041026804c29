"""Monte-Carlo campaign driver, empirical CDFs, and result files.

A campaign is a deterministic function of (config, seed): every drop and
fade owns an RNG stream derived from (seed, drop, fade), so the thread count
never changes the numbers. Outputs are one CSV per algorithm with columns
(drop, ue, se_bps_hz, mse) plus a JSON summary carrying percentiles, the
fronthaul report, and provenance; figures are rendered alongside unless
disabled.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import UsageError
from .estimation import assign_pilots, despread_pilots, estimate_channels, \
    estimation_statistics
from .fronthaul import fronthaul_report
from .geometry import build_channel_statistics, build_geometry, draw_channels
from .metrics import evaluate_combiner
from .receivers import APLocalData, alt_oslp_run, centralized_lmmse, \
    n_lmmse_run, oslp_run, rls_run, sequential_mr, stack_estimates

CAMPAIGN_ALGORITHMS = ("oslp", "cent", "nlmmse", "smr", "rls")


def default_rls_delta(powers_mw):
    """Regularization for the recursive LS baseline, 1e-4 / min_k p_k."""
    return 1e-4 / float(np.min(powers_mw))


@dataclass
class CampaignResult:
    config: object
    algorithms: tuple
    se: dict = field(default_factory=dict)    # alg -> (n_drops, K) bit/s/Hz
    mse: dict = field(default_factory=dict)   # alg -> (n_drops, K)

    def se_samples(self, alg):
        return self.se[alg].reshape(-1)

    def mse_samples(self, alg):
        return self.mse[alg].reshape(-1)

    def summary(self):
        return {
            alg: summarize_samples(self.se_samples(alg)) for alg in self.algorithms
        }

    def provenance(self):
        return {
            "config_hash": self.config.hash(),
            "seed": self.config.rng_seed,
            "version": __version__,
            "config": self.config.to_dict(),
        }

    def to_json_dict(self):
        cfg = self.config
        return {
            "algorithms": self.summary(),
            "fronthaul": fronthaul_report(cfg.K, cfg.tau_c, cfg.tau_p, cfg.N, cfg.L),
            "provenance": self.provenance(),
        }


def quantile(sorted_samples, q):
    """Step-CDF quantile: smallest sample whose empirical CDF reaches q."""
    n = len(sorted_samples)
    idx = min(max(int(np.ceil(q * n)) - 1, 0), n - 1)
    return float(sorted_samples[idx])


def summarize_samples(samples):
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    mean = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return {
        "n_samples": int(n),
        "median": quantile(samples, 0.5),
        "p05": quantile(samples, 0.05),
        "p95": quantile(samples, 0.95),
        "mean": mean,
        "stderr": stderr,
    }


def empirical_cdf(samples):
    """Step CDF at the sorted sample points, probabilities i/n."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise UsageError("empirical_cdf: empty sample set")
    values = np.sort(samples)
    probs = np.arange(1, values.size + 1) / values.size
    return list(zip(values.tolist(), probs.tolist()))


def _build_combiners(ap_data, powers_mw, algorithms, rls_delta, noise_mw):
    outputs = {}
    for alg in algorithms:
        if alg == "oslp":
            outputs[alg] = oslp_run(ap_data, powers_mw)
        elif alg == "cent":
            ghat = stack_estimates(ap_data)
            outputs[alg] = centralized_lmmse(
                ghat, [ap.Sigma for ap in ap_data], powers_mw)
        elif alg == "altoslp":
            outputs[alg] = alt_oslp_run(ap_data, powers_mw)
        elif alg == "nlmmse":
            outputs[alg] = n_lmmse_run(ap_data, powers_mw)
        elif alg == "smr":
            outputs[alg] = sequential_mr(ap_data)
        elif alg == "rls":
            outputs[alg] = rls_run(ap_data, rls_delta, noise_floor=noise_mw)
        else:
            raise UsageError(f"run_campaign: unknown algorithm {alg!r}")
    return outputs


def _run_drop(config, drop, algorithms, rls_delta):
    """All fades of one UE drop; returns per-algorithm (SE, MSE) per UE."""
    powers = config.powers_mw()
    noise = config.noise_mw()
    rng_drop = np.random.default_rng(np.random.SeedSequence((config.rng_seed, drop)))
    geometry = build_geometry(config, rng_drop)
    stats = build_channel_statistics(geometry, config)
    assignment = assign_pilots(config.K, config.tau_p, stats.beta, config.pilots)
    est_stats = estimation_statistics(stats, assignment, powers, noise)
    noise_blocks = list(est_stats.noise_cov)

    log_rate = {alg: np.zeros((config.n_fades, config.K)) for alg in algorithms}
    mse = {alg: np.zeros((config.n_fades, config.K)) for alg in algorithms}
    for fade in range(config.n_fades):
        rng = np.random.default_rng(
            np.random.SeedSequence((config.rng_seed, drop, fade)))
        channels = draw_channels(stats, rng, block_index=fade)
        yp = despread_pilots(channels, assignment, powers, noise, rng)
        hhat = estimate_channels(est_stats, assignment, yp)       # (K, L, N)
        ap_data = [
            APLocalData(Hhat=np.ascontiguousarray(hhat[:, l, :].T),
                        Sigma=est_stats.noise_cov[l])
            for l in range(config.L)
        ]
        ghat = stack_estimates(ap_data)
        outputs = _build_combiners(ap_data, powers, algorithms, rls_delta, noise)
        for alg, out in outputs.items():
            record = evaluate_combiner(out, ghat, noise_blocks, powers)
            log_rate[alg][fade] = record.log_rate
            mse[alg][fade] = record.mse

    prelog = config.prelog()
    return {
        alg: (prelog * log_rate[alg].mean(axis=0), mse[alg].mean(axis=0))
        for alg in algorithms
    }


def run_campaign(config, algorithms=CAMPAIGN_ALGORITHMS, threads=1,
                 rls_delta=None):
    """Monte-Carlo SE/MSE campaign over n_drops UE placements."""
    config.validate()
    algorithms = tuple(algorithms)
    if not algorithms:
        raise UsageError("run_campaign: algorithm list is empty")
    if rls_delta is None:
        rls_delta = default_rls_delta(config.powers_mw())

    result = CampaignResult(config=config, algorithms=algorithms)
    for alg in algorithms:
        result.se[alg] = np.zeros((config.n_drops, config.K))
        result.mse[alg] = np.zeros((config.n_drops, config.K))

    def work(drop):
        return drop, _run_drop(config, drop, algorithms, rls_delta)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_drop = list(pool.map(work, range(config.n_drops)))
    else:
        per_drop = [work(d) for d in range(config.n_drops)]

    for drop, drop_result in per_drop:
        for alg, (se_k, mse_k) in drop_result.items():
            result.se[alg][drop] = se_k
            result.mse[alg][drop] = mse_k
    return result


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

def se_csv_path(outdir, alg):
    return Path(outdir) / f"se_{alg}.csv"


def write_results(result, outdir, figures=True):
    """Write per-algorithm CSVs, the JSON summary, and (optionally) figures.

    Returns the list of paths written. Repeated runs with the same config
    and seed produce byte-identical CSV/JSON files.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for alg in result.algorithms:
        path = se_csv_path(outdir, alg)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["drop", "ue", "se_bps_hz", "mse"])
            se, mse = result.se[alg], result.mse[alg]
            for drop in range(se.shape[0]):
                for ue in range(se.shape[1]):
                    writer.writerow([drop, ue, repr(float(se[drop, ue])),
                                     repr(float(mse[drop, ue]))])
        written.append(path)

    summary_path = outdir / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)

    if figures:
        from .report import save_se_cdf_figure
        fig_path = outdir / "se_cdf.png"
        save_se_cdf_figure(
            {alg: result.se_samples(alg) for alg in result.algorithms}, fig_path)
        written.append(fig_path)
    return written


def read_se_csv(path):
    """Read one per-algorithm result CSV back into (drop, ue, se, mse) arrays."""
    drops, ues, ses, mses = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            drops.append(int(row["drop"]))
            ues.append(int(row["ue"]))
            ses.append(float(row["se_bps_hz"]))
            mses.append(float(row["mse"]))
    return (np.asarray(drops), np.asarray(ues),
            np.asarray(ses, dtype=float), np.asarray(mses, dtype=float))
