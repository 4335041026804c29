import json

import numpy as np
import pytest

from stripesim.campaign import (
    empirical_cdf,
    quantile,
    read_se_csv,
    run_campaign,
    se_csv_path,
    summarize_samples,
    write_results,
)
from stripesim.errors import UsageError

from conftest import tiny_config


@pytest.fixture(scope="module")
def small_result():
    cfg = tiny_config(L=3, N=2, K=3, n_drops=3, n_fades=2, tau_p=2)
    return run_campaign(cfg, algorithms=("oslp", "cent", "smr"))


class TestEmpiricalCdf:
    def test_single_sample(self):
        assert empirical_cdf([1.0]) == [(1.0, 1.0)]

    def test_median_readout(self):
        cdf = empirical_cdf([1.0, 2.0, 3.0, 4.0])
        median = next(v for v, p in cdf if p >= 0.5)
        assert median == 2.0
        assert quantile(np.array([1.0, 2.0, 3.0, 4.0]), 0.5) == 2.0

    def test_monotone_and_complete(self):
        rng = np.random.default_rng(0)
        cdf = empirical_cdf(rng.normal(size=100))
        values, probs = zip(*cdf)
        assert all(b >= a for a, b in zip(values, values[1:]))
        assert all(b >= a for a, b in zip(probs, probs[1:]))
        assert probs[-1] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            empirical_cdf([])


class TestCampaign:
    def test_sample_counts(self, small_result):
        cfg = small_result.config
        for alg in small_result.algorithms:
            assert small_result.se_samples(alg).size == cfg.K * cfg.n_drops
            assert small_result.summary()[alg]["n_samples"] == cfg.K * cfg.n_drops

    def test_sequential_optimum_equals_centralized(self, small_result):
        se_seq = small_result.se["oslp"]
        se_cent = small_result.se["cent"]
        rel = np.abs(se_seq - se_cent) / np.maximum(np.abs(se_cent), 1e-300)
        assert rel.max() <= 1e-9

    def test_deterministic_across_thread_counts(self):
        cfg = tiny_config(L=3, N=2, K=3, n_drops=4, n_fades=2, tau_p=2)
        serial = run_campaign(cfg, algorithms=("oslp", "smr"), threads=1)
        threaded = run_campaign(cfg, algorithms=("oslp", "smr"), threads=3)
        for alg in ("oslp", "smr"):
            np.testing.assert_array_equal(serial.se[alg], threaded.se[alg])
            np.testing.assert_array_equal(serial.mse[alg], threaded.mse[alg])

    def test_empty_algorithm_list_rejected(self):
        with pytest.raises(UsageError):
            run_campaign(tiny_config(), algorithms=())

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(UsageError):
            run_campaign(tiny_config(n_drops=1, n_fades=1),
                         algorithms=("genie",))


class TestResultFiles:
    def test_round_trip_reproduces_summary_exactly(self, small_result, tmp_path):
        write_results(small_result, tmp_path, figures=False)
        summary = json.loads((tmp_path / "summary.json").read_text())
        for alg in small_result.algorithms:
            _, _, se, _ = read_se_csv(se_csv_path(tmp_path, alg))
            rebuilt = summarize_samples(se)
            assert rebuilt == summary["algorithms"][alg]

    def test_repeated_runs_byte_identical(self, tmp_path):
        cfg = tiny_config(L=2, N=1, K=2, n_drops=1, n_fades=1, tau_p=2)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            result = run_campaign(cfg, algorithms=("oslp",))
            write_results(result, out, figures=False)
        for name in ("se_oslp.csv", "summary.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_figures_rendered(self, small_result, tmp_path):
        written = write_results(small_result, tmp_path, figures=True)
        fig = tmp_path / "se_cdf.png"
        assert fig in written and fig.stat().st_size > 0

    def test_provenance_recorded(self, small_result):
        blob = small_result.to_json_dict()
        assert blob["provenance"]["config_hash"] == small_result.config.hash()
        assert blob["provenance"]["seed"] == small_result.config.rng_seed
        assert blob["fronthaul"]["rows"]["oslp"]["stats_reals_per_block"] == \
            small_result.config.K ** 2

    def test_cdf_median_matches_summary_median(self, small_result):
        samples = small_result.se_samples("oslp")
        cdf = empirical_cdf(samples)
        from_cdf = next(v for v, p in cdf if p >= 0.5)
        assert from_cdf == small_result.summary()["oslp"]["median"]
