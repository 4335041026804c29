import json

import pytest

from stripesim.cli import main
from stripesim.config import PRESETS, load_config, preset_config


TINY_TOML = """\
L = 3
N = 2
K = 3
tau_c = 200
tau_p = 3
ue_power_mW = 50.0
noise_power_dBm = -92.0
n_drops = 2
n_fades = 2
rng_seed = 11
"""


@pytest.fixture
def tiny_toml(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


class TestConfigLoading:
    def test_load_flat_toml(self, tiny_toml):
        cfg = load_config(tiny_toml)
        assert (cfg.L, cfg.N, cfg.K) == (3, 2, 3)
        assert cfg.rng_seed == 11

    def test_file_overrides_preset(self, tiny_toml):
        cfg = load_config(tiny_toml, base="paper-fig3")
        assert cfg.L == 3                      # file wins
        assert cfg.asd_deg == PRESETS["paper-fig3"]["asd_deg"]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("L = 3\nwarp_factor = 9\n")
        from stripesim.errors import ConfigurationError
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_presets_are_valid(self):
        for name in PRESETS:
            cfg = preset_config(name)
            cfg.validate()


class TestSimulateCommand:
    def test_writes_outputs_and_prints_summary(self, tiny_toml, tmp_path, capsys):
        out = tmp_path / "run"
        code = main(["simulate", "--config", str(tiny_toml),
                     "--algorithms", "oslp,cent,smr", "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "oslp" in captured and "median" in captured
        for name in ("se_oslp.csv", "se_cent.csv", "se_smr.csv",
                     "summary.json", "se_cdf.png"):
            assert (out / name).exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["provenance"]["seed"] == 11

    def test_seed_override_changes_hash(self, tiny_toml, tmp_path):
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(["simulate", "--config", str(tiny_toml), "--algorithms", "smr",
              "--out", str(out1), "--no-figures"])
        main(["simulate", "--config", str(tiny_toml), "--algorithms", "smr",
              "--out", str(out2), "--seed", "99", "--no-figures"])
        s1 = json.loads((out1 / "summary.json").read_text())
        s2 = json.loads((out2 / "summary.json").read_text())
        assert s1["provenance"]["config_hash"] != s2["provenance"]["config_hash"]

    def test_missing_config_and_preset(self):
        assert main(["simulate"]) == 1

    def test_unknown_algorithm(self, tiny_toml):
        assert main(["simulate", "--config", str(tiny_toml),
                     "--algorithms", "genie"]) == 1

    def test_bad_flag_is_config_error(self):
        assert main(["simulate", "--no-such-flag"]) == 1


class TestFronthaulCommand:
    def test_prints_table_and_writes_files(self, tmp_path, capsys):
        out = tmp_path / "fh"
        code = main(["fronthaul", "--K", "20", "--tauc", "2000", "--taup", "20",
                     "--N", "4", "--L-range", "10:12", "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "oslp" in captured and "latency" in captured
        for name in ("fronthaul.csv", "fronthaul.json", "fronthaul_savings.png"):
            assert (out / name).exists()
        blob = json.loads((out / "fronthaul.json").read_text())
        assert len(blob["reports"]) == 3

    def test_bad_range(self):
        assert main(["fronthaul", "--K", "1", "--tauc", "10", "--taup", "1",
                     "--N", "1", "--L-range", "5"]) == 1


class TestVerifyCommand:
    def test_passes_and_writes_report(self, tmp_path, capsys):
        out = tmp_path / "verify.json"
        code = main(["verify", "--instances", "10", "--seed", "0",
                     "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr().out
        assert "theorem1_equivalence" in captured
        assert json.loads(out.read_text())["passed"] is True

    def test_perturb_fails_with_exit_code_2(self, capsys):
        code = main(["verify", "--instances", "5", "--perturb"])
        assert code == 2
        assert "FAIL" in capsys.readouterr().out
