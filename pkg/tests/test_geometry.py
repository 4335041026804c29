import numpy as np
import pytest

from stripesim.errors import ConfigurationError, NumericError
from stripesim.geometry import (
    build_channel_statistics,
    build_geometry,
    correlation_lags,
    draw_channels,
    pathloss_db,
    perimeter_point,
    spatial_correlation,
)
from stripesim.linalg import psd_sqrt

from conftest import tiny_config


# Exact local-scattering lags at phi=30 deg, ASD=15 deg, N=4, computed with
# scipy.integrate.quad over the Gaussian angle density truncated at 12 sigma
# (adaptive quadrature, independent of the Gauss-Hermite implementation).
ORACLE_LAGS_30_15 = np.array([
    1.0 + 0.0j,
    0.022947834044882147 + 0.786428622345027j,
    -0.38273344046889357 - 0.03723385663955363j,
    0.06898379353511747 - 0.10259087270386712j,
])


class TestGeometry:
    def test_equidistant_spacing_on_loop(self):
        cfg = tiny_config(L=4)
        geo = build_geometry(cfg, np.random.default_rng(0))
        # 500 m loop, 4 APs: arc spacing 125 m puts them on the corners.
        expected = perimeter_point(np.array([0.0, 125.0, 250.0, 375.0]), 125.0)
        np.testing.assert_allclose(geo.ap_xy, expected)

    def test_perimeter_walk_is_counterclockwise(self):
        side = 125.0
        pts = perimeter_point(np.array([0.0, 62.5, 125.0, 187.5, 250.0, 375.0]), side)
        np.testing.assert_allclose(pts[0], [0.0, 0.0])
        np.testing.assert_allclose(pts[1], [62.5, 0.0])
        np.testing.assert_allclose(pts[2], [125.0, 0.0])
        np.testing.assert_allclose(pts[3], [125.0, 62.5])
        np.testing.assert_allclose(pts[4], [125.0, 125.0])
        np.testing.assert_allclose(pts[5], [0.0, 125.0])

    def test_distance_includes_height(self):
        cfg = tiny_config()
        geo = build_geometry(cfg, np.random.default_rng(3))
        horizontal = np.linalg.norm(
            geo.ue_xy[:, None, :] - geo.ap_xy[None, :, :], axis=-1)
        np.testing.assert_allclose(
            geo.distances, np.hypot(horizontal, cfg.ap_ue_height_diff_m))
        # A UE directly above an AP would be exactly height_diff away.
        np.testing.assert_allclose(np.hypot(0.0, 5.0), 5.0)

    def test_ues_inside_box(self):
        cfg = tiny_config(K=200)
        geo = build_geometry(cfg, np.random.default_rng(1))
        lo = (cfg.area_side_m - cfg.ue_box_side_m) / 2
        hi = lo + cfg.ue_box_side_m
        assert np.all(geo.ue_xy >= lo) and np.all(geo.ue_xy <= hi)

    def test_determinism(self):
        cfg = tiny_config()
        geo1 = build_geometry(cfg, np.random.default_rng(42))
        geo2 = build_geometry(cfg, np.random.default_rng(42))
        np.testing.assert_array_equal(geo1.ue_xy, geo2.ue_xy)
        np.testing.assert_array_equal(geo1.distances, geo2.distances)

    def test_short_stripe_rejected(self):
        with pytest.raises(ConfigurationError):
            tiny_config(stripe_length_m=100.0)


class TestPathloss:
    def test_reference_values(self):
        assert pathloss_db(1.0) == pytest.approx(-30.5)
        assert pathloss_db(10.0) == pytest.approx(-67.2)
        assert pathloss_db(100.0) == pytest.approx(-103.9)

    def test_domain(self):
        with pytest.raises(ValueError):
            pathloss_db(0.0)
        with pytest.raises(ValueError):
            pathloss_db(-3.0)


class TestSpatialCorrelation:
    def test_single_antenna_is_pathloss(self):
        cfg = tiny_config(N=1)
        geo = build_geometry(cfg, np.random.default_rng(5))
        r = spatial_correlation(geo, 0, 0, cfg)
        beta = 10 ** (pathloss_db(geo.distances[0, 0]) / 10)
        assert r.shape == (1, 1)
        np.testing.assert_allclose(r[0, 0], beta, rtol=1e-12)

    def test_zero_spread_limit_is_rank_one(self):
        lags = correlation_lags(np.deg2rad(30.0), 1e-9, 4)
        np.testing.assert_allclose(np.abs(lags), 1.0, atol=1e-12)
        import scipy.linalg as sla
        r = sla.toeplitz(lags, lags.conj())
        eig = np.linalg.eigvalsh(r)
        assert eig[-1] == pytest.approx(4.0, rel=1e-9)
        assert abs(eig[-2]) < 1e-8

    def test_against_adaptive_quadrature_oracle(self):
        lags = correlation_lags(np.deg2rad(30.0), np.deg2rad(15.0), 4)
        np.testing.assert_allclose(lags, ORACLE_LAGS_30_15, atol=1e-3)

    def test_gaussian_closed_form_matches_at_small_spread(self):
        angle = np.deg2rad(30.0)
        for asd_deg, tol in [(1.0, 1e-3), (0.25, 1e-4)]:
            exact = correlation_lags(angle, np.deg2rad(asd_deg), 4)
            approx = correlation_lags(angle, np.deg2rad(asd_deg), 4, method="gaussian")
            assert np.max(np.abs(exact - approx)) < tol

    def test_hermitian_psd_and_exact_trace(self):
        cfg = tiny_config(N=4, K=4, L=6)
        geo = build_geometry(cfg, np.random.default_rng(8))
        stats = build_channel_statistics(geo, cfg)
        for k in range(cfg.K):
            for l in range(cfg.L):
                r = stats.corr[k, l]
                hermitian_defect = np.linalg.norm(r - r.conj().T)
                assert hermitian_defect <= 1e-12 * np.linalg.norm(r)
                eig = np.linalg.eigvalsh(r)
                assert eig[0] >= -1e-10 * eig[-1]
                # trace/N equals the pathloss gain exactly (lag 0 pinned to 1)
                assert np.trace(r).real / cfg.N == stats.beta[k, l]


class TestDrawChannels:
    def test_zero_correlation_gives_zero_channel(self):
        from stripesim.geometry import ChannelStatistics
        zero = np.zeros((1, 1, 2, 2), dtype=complex)
        stats = ChannelStatistics(corr=zero, beta=np.zeros((1, 1)),
                                  corr_sqrt=zero.copy())
        ch = draw_channels(stats, np.random.default_rng(0))
        np.testing.assert_array_equal(ch.H, 0.0)

    def test_identity_correlation_sample_covariance(self):
        from stripesim.linalg import complex_normal
        n = 2
        rng = np.random.default_rng(99)
        n_samples = 10 ** 5
        draws = complex_normal(rng, (n_samples, n))    # sqrt(I) g = g
        cov = draws.T @ draws.conj() / n_samples
        assert np.linalg.norm(cov - np.eye(n)) < 0.05

    def test_sample_covariance_converges_for_generated_matrix(self):
        cfg = tiny_config(N=3, K=1, L=1)
        geo = build_geometry(cfg, np.random.default_rng(4))
        stats = build_channel_statistics(geo, cfg)
        r = stats.corr[0, 0]
        factor = stats.corr_sqrt[0, 0]
        rng = np.random.default_rng(11)
        n_samples = 10 ** 5
        from stripesim.linalg import complex_normal
        g = complex_normal(rng, (n_samples, 3))
        h = (factor @ g.T).T                           # rows are h_i^T
        cov = h.T @ h.conj() / n_samples               # sum h_i h_i^H / n
        err = np.linalg.norm(cov - r)
        assert err * np.sqrt(n_samples) < 5.0 * np.linalg.norm(r)

    def test_fixed_seed_bit_identical(self):
        cfg = tiny_config()
        geo = build_geometry(cfg, np.random.default_rng(2))
        stats = build_channel_statistics(geo, cfg)
        h1 = draw_channels(stats, np.random.default_rng(77)).H
        h2 = draw_channels(stats, np.random.default_rng(77)).H
        np.testing.assert_array_equal(h1, h2)

    def test_non_psd_input_rejected(self):
        bad = np.array([[1.0, 0.0], [0.0, -0.5]], dtype=complex)
        with pytest.raises(NumericError):
            psd_sqrt(bad)
