import subprocess
import sys

import pytest

from rissim.channels import ChannelModel, LinkRole
from rissim.cli import main
from rissim.scenario import default_config, dump_config, full_config, load_config

SMALL_INI = """
[bs]
n_y = 2
n_z = 2

[ris]
tiles_y = 2
tiles_z = 1
tile_n_y = 2
tile_n_z = 2

[run]
trials = 3
models = iid_rayleigh, iid_rician

[sweep]
q = 8
n_ue = 2
"""


class TestConfigRoundTrip:
    def test_dump_load_identity(self):
        cfg = default_config()
        text = dump_config(cfg)
        again = dump_config(load_config(text))
        assert text == again

    def test_overrides_apply(self):
        cfg = load_config(SMALL_INI)
        assert cfg.bs_counts == (2, 2)
        assert cfg.ris_tiles == (2, 1)
        assert cfg.q_total == 8
        assert cfg.trials == 3
        assert cfg.models == [ChannelModel.IID_RAYLEIGH, ChannelModel.IID_RICIAN]
        # untouched defaults survive
        assert cfg.links[LinkRole.DIRECT].params.eta == 3.5
        assert cfg.links[LinkRole.DIRECT].params.blockage_db == -40.0

    def test_unknown_section_rejected(self):
        with pytest.raises(ValueError):
            load_config("[typo]\nx = 1\n")

    def test_full_preset(self):
        cfg = full_config()
        assert cfg.trials == 1000
        assert 4096 in cfg.sweep_q


class TestCliRun:
    def test_run_writes_csv(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text(SMALL_INI)
        out = tmp_path / "agg.csv"
        rc = main(["run", "--config", str(ini), "--out", str(out), "--raw"])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "model,Q,n_ue,trials,feasible_frac,mean_ptx_dbm,std_ptx_db,seed"
        assert len(lines) == 3  # two models, one cell each
        raw = (tmp_path / "agg.raw.csv").read_text().splitlines()
        assert raw[0] == "model,Q,n_ue,trial,feasible,ptx_watts,seed"
        assert len(raw) == 7

    def test_seed_and_trials_flags(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text(SMALL_INI)
        out = tmp_path / "agg.csv"
        main(["run", "--config", str(ini), "--seed", "99", "--trials", "2", "--out", str(out)])
        body = out.read_text()
        assert body.splitlines()[1].endswith(",99")
        assert ",2," in body.splitlines()[1]

    def test_raw_without_out_fails(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text(SMALL_INI)
        assert main(["run", "--config", str(ini), "--raw"]) == 2


class TestCliScenario:
    def test_prints_resolved_config(self, capsys):
        assert main(["scenario"]) == 0
        text = capsys.readouterr().out
        assert "[system]" in text
        assert "carrier_hz = 5000000000" in text
        reloaded = load_config(text)
        assert reloaded == default_config()

    def test_preset_flag(self, capsys):
        main(["scenario", "--preset", "full"])
        assert "trials = 1000" in capsys.readouterr().out


class TestCliCheck:
    def test_oracle_suite_passes(self, capsys):
        assert main(["check"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 3 and "FAIL" not in out


class TestSubprocessEntry:
    def test_module_invocation(self, tmp_path):
        ini = tmp_path / "cfg.ini"
        ini.write_text(SMALL_INI)
        proc = subprocess.run(
            [sys.executable, "-m", "rissim", "run", "--config", str(ini), "--trials", "2"],
            capture_output=True,
            text=True,
            timeout=300,
        )
        assert proc.returncode == 0
        assert proc.stdout.startswith("model,Q,n_ue,")
