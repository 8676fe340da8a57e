import numpy as np
import pytest

from meteor.cli import build_config, config_hash, main


def run(argv):
    return main(argv)


def test_verify_exit_zero(tmp_path, capsys):
    assert run(["verify", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert (tmp_path / "verify.csv").exists()


def test_simulate_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--set", "side=15", "--set", "horizon=3.0", "--set", "t_end=3.0"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert (a / "state.csv").read_bytes() == (b / "state.csv").read_bytes()
    assert (a / "events.csv").read_bytes() == (b / "events.csv").read_bytes()


def test_oracle_exit_zero(tmp_path):
    assert run(["oracle", "--set", "side=6", "--set", "horizon=3.0", "--set", "trials=3", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "oracle.csv").read_text()
    assert text.startswith("# config_hash=")


def test_config_file_and_overrides(tmp_path, monkeypatch):
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text("# comment\nside = 12\nhorizon = 2.0\n")

    class Args:
        config = str(cfgfile)
        set = ["t_end=2.0"]

    cfg = build_config("simulate", Args())
    assert cfg["side"] == 12 and cfg["horizon"] == 2.0 and cfg["t_end"] == 2.0
    # env var overrides the seed
    monkeypatch.setenv("METEOR_SEED", "99")
    cfg2 = build_config("simulate", Args())
    assert cfg2["seed"] == 99
    assert config_hash(cfg) != config_hash(cfg2)


def test_unknown_key_is_usage_error(tmp_path):
    assert run(["simulate", "--set", "bogus=1", "--out", str(tmp_path)]) == 2


def test_malformed_set_is_usage_error(tmp_path):
    assert run(["simulate", "--set", "noequals", "--out", str(tmp_path)]) == 2


def test_missing_subcommand_exits_2():
    with pytest.raises(SystemExit) as e:
        run([])
    assert e.value.code == 2


def test_support_subcommand(tmp_path):
    rc = run(["support", "--set", "targets=2", "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "support.csv").exists()


def test_moments_small_run(tmp_path):
    rc = run(
        [
            "moments",
            "--set", "side=100",
            "--set", "replicas=8",
            "--set", "samples=60",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    assert (tmp_path / "moments.json").exists()


def test_couple_small_run(tmp_path):
    rc = run(
        [
            "couple",
            "--set", "replicas=20",
            "--set", "t_end=600.0",
            "--set", "side=301",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    lines = (tmp_path / "couple.csv").read_text().strip().splitlines()
    assert lines[-1].split(",")[0] == "19"
