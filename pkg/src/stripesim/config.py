"""Simulation configuration: dataclass, named presets, and TOML loading.

All transmit powers are handled in linear mW internally; the noise power is
the only dBm field and is converted once, at access time.
"""

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


PILOT_SCHEMES = ("greedy", "roundrobin")


@dataclass
class SimConfig:
    """Scenario and campaign parameters for one simulation run.

    Geometry fields describe a square service area whose perimeter carries
    the daisy-chained APs; UEs are dropped uniformly in a concentric square.
    """

    L: int = 24                       # number of APs on the stripe
    N: int = 4                        # antennas per AP
    K: int = 10                       # number of single-antenna UEs
    tau_c: int = 2000                 # coherence block length (channel uses)
    tau_p: int = 10                   # pilot length (channel uses)
    ue_power_mW: float | list = 50.0  # per-UE transmit power, scalar or length-K list
    noise_power_dBm: float = -92.0
    area_side_m: float = 125.0
    stripe_length_m: float = 500.0
    ue_box_side_m: float = 100.0
    ap_ue_height_diff_m: float = 5.0
    asd_deg: float = 15.0             # angular standard deviation of scattering
    rng_seed: int = 1
    n_drops: int = 100                # UE-placement realizations
    n_fades: int = 20                 # channel realizations per drop
    pilots: str = "greedy"            # pilot assignment scheme
    bandwidth_mhz: float = 100.0      # metadata only; SE is reported per Hz

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(field, msg):
            raise ConfigurationError(f"{field}: {msg}")

        for field in ("L", "N", "K"):
            if int(getattr(self, field)) < 1:
                bad(field, "must be >= 1")
        if not 1 <= self.tau_p <= self.tau_c:
            bad("tau_p", f"must satisfy 1 <= tau_p <= tau_c, got {self.tau_p} vs tau_c={self.tau_c}")
        powers = np.atleast_1d(np.asarray(self.ue_power_mW, dtype=float))
        if powers.size not in (1, self.K):
            bad("ue_power_mW", f"expected a scalar or {self.K} values, got {powers.size}")
        if np.any(powers <= 0):
            bad("ue_power_mW", "all powers must be > 0")
        if self.asd_deg <= 0:
            bad("asd_deg", "must be > 0")
        for field in ("area_side_m", "stripe_length_m", "ue_box_side_m"):
            if getattr(self, field) <= 0:
                bad(field, "must be > 0")
        if self.ue_box_side_m > self.area_side_m:
            bad("ue_box_side_m", "UE box cannot exceed the service area")
        if self.stripe_length_m < 4.0 * self.area_side_m - 1e-9:
            bad("stripe_length_m", "stripe must be at least the area perimeter to wrap around it")
        if self.ap_ue_height_diff_m < 0:
            bad("ap_ue_height_diff_m", "must be >= 0")
        if self.n_drops < 1 or self.n_fades < 1:
            bad("n_drops/n_fades", "must be >= 1")
        if self.pilots not in PILOT_SCHEMES:
            bad("pilots", f"must be one of {PILOT_SCHEMES}")

    def powers_mw(self):
        """Per-UE transmit powers as a length-K vector in linear mW."""
        powers = np.atleast_1d(np.asarray(self.ue_power_mW, dtype=float))
        if powers.size == 1:
            powers = np.full(self.K, float(powers[0]))
        return powers

    def noise_mw(self):
        """Receiver noise power in linear mW."""
        return float(10.0 ** (self.noise_power_dBm / 10.0))

    def prelog(self):
        """Pilot-overhead prelog factor, 1 - tau_p/tau_c."""
        return 1.0 - self.tau_p / self.tau_c

    def to_dict(self):
        return dataclasses.asdict(self)

    def hash(self):
        """Stable hash of the configuration, used for result provenance."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


# Named presets matching the reference scenarios: a 125 m x 125 m area with a
# 500 m stripe wrapped around its perimeter, 2 GHz urban-microcell pathloss,
# -92 dBm noise, tau_c = 2000, tau_p = min(K, 20) and 50 mW UEs by default.
_BASE = dict(
    tau_c=2000,
    ue_power_mW=50.0,
    noise_power_dBm=-92.0,
    area_side_m=125.0,
    stripe_length_m=500.0,
    ue_box_side_m=100.0,
    ap_ue_height_diff_m=5.0,
    asd_deg=15.0,
    rng_seed=1,
    n_drops=100,
    n_fades=20,
)

PRESETS = {
    "paper-fig3": dict(_BASE, L=24, N=4, K=10, tau_p=10),
    "paper-fig4": dict(_BASE, L=24, N=1, K=24, tau_p=20),
    "paper-fig5": dict(_BASE, L=24, N=1, K=10, tau_p=10, ue_power_mW=1.0),
    "paper-fig6": dict(_BASE, L=60, N=4, K=20, tau_p=20),
}


def preset_config(name, **overrides):
    if name not in PRESETS:
        raise ConfigurationError(f"preset: unknown preset {name!r}, choose from {sorted(PRESETS)}")
    fields = dict(PRESETS[name])
    fields.update(overrides)
    return SimConfig(**fields)


def load_config(path, base=None, **overrides):
    """Load a flat TOML key-value file, optionally on top of a preset name.

    File keys override the preset; keyword overrides win over both.
    """
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"{path}: not valid TOML ({exc})") from exc
    fields = dict(PRESETS[base]) if base else {}
    known = {f.name for f in dataclasses.fields(SimConfig)}
    for key, value in data.items():
        if key not in known:
            raise ConfigurationError(f"{key}: unknown configuration key in {path}")
        fields[key] = value
    fields.update(overrides)
    return SimConfig(**fields)


def dump_config(config, path):
    """Write a SimConfig back out as a flat TOML file."""
    lines = []
    for key, value in config.to_dict().items():
        if isinstance(value, str):
            lines.append(f'{key} = "{value}"')
        elif isinstance(value, list):
            lines.append(f"{key} = {value}")
        else:
            lines.append(f"{key} = {value}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
