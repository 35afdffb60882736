"""End-to-end tests for the command line front end.

Every subcommand runs in-process through main(argv) against a small
config file, so the tests cover argument parsing, config merging, and
the CSV outputs without spawning real processes.
"""

import pytest

from otfs_radar.cli import main

SMALL_CFG = """\
# desk-scale run
n_doppler = 16
m_delay = 16
target_count = 2
snr_sweep_db = 0,10
trials_per_point = 6
crlb_trials = 2
rng_seed = 11
p_fa = 1e-3
"""


@pytest.fixture()
def cfg_path(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG)
    return str(path)


def _run(cfg_path, out_dir, *extra):
    return main(list(extra) + ["--config", cfg_path, "--out-dir", str(out_dir)])


def test_simulate_writes_metrics_and_manifest(tmp_path, cfg_path, capsys):
    out = tmp_path / "out_a"
    assert _run(cfg_path, out, "simulate") == 0
    lines = (out / "metrics.csv").read_text().strip().split("\n")
    assert lines[0].startswith("snr_db,detection_rate,false_alarm_rate,")
    assert len(lines) == 3
    assert "metrics.csv" in capsys.readouterr().out
    manifest = (out / "manifest.txt").read_text()
    assert "rng_seed = 11" in manifest and "failed_trials = 0" in manifest
    # a rerun must reproduce the sweep byte for byte
    out_b = tmp_path / "out_b"
    _run(cfg_path, out_b, "simulate")
    assert (out / "metrics.csv").read_bytes() == (out_b / "metrics.csv").read_bytes()


def test_detect_subcommand(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert _run(cfg_path, out, "detect", "--trial", "1", "--snr-db", "10") == 0
    lines = (out / "detections.csv").read_text().strip().split("\n")
    assert lines[0] == "k_int,l_int,statistic,threshold"


def test_estimate_subcommand(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert _run(cfg_path, out, "estimate", "--snr-db", "10") == 0
    lines = (out / "estimates.csv").read_text().strip().split("\n")
    assert lines[0] == (
        "k_int,l_int,kappa,iota,doppler_index,delay_index,range_m,velocity_mps"
    )


def test_crlb_subcommand(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert _run(cfg_path, out, "crlb") == 0
    lines = (out / "crlb.csv").read_text().strip().split("\n")
    assert lines[0] == "snr_db,kappa_bound,iota_bound,range_bound_m2,velocity_bound_mps2"
    assert len(lines) == 3
    assert lines[1].startswith("0,") and lines[2].startswith("10,")


def test_roc_subcommand(tmp_path, cfg_path):
    out = tmp_path / "out"
    rc = _run(
        cfg_path, out, "roc", "--snr-db", "-12", "--p-fa-values", "1e-3,1e-2,1e-1"
    )
    assert rc == 0
    lines = (out / "roc.csv").read_text().strip().split("\n")
    assert lines[0] == (
        "p_fa,detection_rate,false_alarm_rate,"
        "baseline_detection_rate,baseline_false_alarm_rate"
    )
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["0.001", "0.01", "0.1"]
    rates = [float(r[1]) for r in rows]
    assert rates == sorted(rates)


def test_heatmap_subcommand(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert _run(cfg_path, out, "heatmap", "--snr-db", "10") == 0
    lines = (out / "heatmap.csv").read_text().strip().split("\n")
    assert len(lines) == 16
    assert all(len(line.split(",")) == 16 for line in lines)


def test_seed_flag_overrides_config(tmp_path, cfg_path):
    out = tmp_path / "out"
    assert _run(cfg_path, out, "crlb", "--seed", "7", "--workers", "2") == 0
    manifest = (out / "manifest.txt").read_text()
    assert "rng_seed = 7" in manifest
    assert "workers = 2" in manifest


def test_unknown_config_key_fails_loudly(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("doppler_bins = 32\n")
    with pytest.raises(ValueError, match="unknown key"):
        main(["detect", "--config", str(bad), "--out-dir", str(tmp_path / "out")])


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "otfs-radar" in capsys.readouterr().out
