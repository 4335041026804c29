import numpy as np
import pytest

from stripesim.config import SimConfig


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_config(**overrides):
    """Small, fast configuration for unit tests."""
    fields = dict(
        L=4, N=2, K=3, tau_c=200, tau_p=3, ue_power_mW=50.0,
        noise_power_dBm=-92.0, area_side_m=125.0, stripe_length_m=500.0,
        ue_box_side_m=100.0, ap_ue_height_diff_m=5.0, asd_deg=15.0,
        rng_seed=7, n_drops=2, n_fades=3,
    )
    fields.update(overrides)
    return SimConfig(**fields)
