"""Uplink cell-free massive MIMO over a sequential (radio stripe) fronthaul.

Library layout:

  config       scenario presets and TOML configuration
  geometry     stripe geometry, pathloss, spatial correlation, channel draws
  estimation   pilot assignment and MMSE channel estimation
  receivers    centralized LMMSE, the MMSE-optimal sequential receiver and
               its semi-distributed variant, sequential N-LMMSE, MR, and RLS
  metrics      instantaneous SINR/SE/MSE and per-AP update identities
  fronthaul    signaling counts per coherence block and the latency model
  campaign     Monte-Carlo SE campaigns, CDFs, and result files
  verification randomized oracle suite for the algebraic identities
"""

__version__ = "0.1.0"

from .config import PRESETS, SimConfig, load_config, preset_config
from .errors import ConfigurationError, NumericError, UsageError
from .geometry import (
    ChannelRealization,
    ChannelStatistics,
    NetworkGeometry,
    build_channel_statistics,
    build_geometry,
    draw_channels,
    pathloss_db,
    spatial_correlation,
)
from .estimation import (
    EstimationResult,
    PilotAssignment,
    assign_pilots,
    colored_noise_cov,
    despread_pilots,
    mmse_estimate,
    run_estimation,
)
from .receivers import (
    APLocalData,
    ReceiverOutput,
    SequentialState,
    alt_oslp_run,
    centralized_lmmse,
    effective_combiner,
    n_lmmse_run,
    oslp_run,
    oslp_step,
    rls_run,
    sequential_mr,
)
from .metrics import (
    MetricsRecord,
    achievable_se,
    instantaneous_sinr,
    max_sinr,
    min_mse,
    mse_of_combiner,
    prop3_updates,
)
from .fronthaul import (
    FronthaulRow,
    fronthaul_count,
    fronthaul_report,
    latency_blocks,
    savings_vs_centralized,
)
from .campaign import (
    CampaignResult,
    empirical_cdf,
    read_se_csv,
    run_campaign,
    write_results,
)
from .verification import VerificationReport, verify
