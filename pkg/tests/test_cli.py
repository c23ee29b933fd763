"""CLI subcommands, exit codes, and log-directory integrity checks."""

import os

import pytest

from redlead.cli import main

TINY_CFG = (
    "experiment.v_ranges = 17:30\n"
    "experiment.runs_per_cell = 1\n"
    "experiment.episodes_per_run = 2\n"
    "env.episode_steps = 200\n"
)


@pytest.fixture
def tiny_cfg_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(TINY_CFG)
    return str(path)


def run_cli(*argv):
    return main(list(argv))


class TestTrain:
    def test_train_writes_logs_and_resolved_config(self, tmp_path, tiny_cfg_file, capsys):
        out = str(tmp_path / "out")
        assert run_cli("train", "--out", out, "--config", tiny_cfg_file, "--seed", "3") == 0
        assert os.path.isfile(os.path.join(out, "config.cfg"))
        assert os.path.isfile(os.path.join(out, "summary.txt"))
        assert os.path.isfile(os.path.join(out, "cell_17-30_naive", "run0.csv"))
        cfg_text = open(os.path.join(out, "config.cfg")).read()
        assert "experiment.base_seed = 3" in cfg_text
        assert "mean_collisions" in capsys.readouterr().out

    def test_same_seed_byte_identical(self, tmp_path, tiny_cfg_file):
        a, b = str(tmp_path / "a"), str(tmp_path / "b")
        run_cli("train", "--out", a, "--config", tiny_cfg_file)
        run_cli("train", "--out", b, "--config", tiny_cfg_file)
        fa = os.path.join(a, "cell_17-30_naive", "run0.csv")
        fb = os.path.join(b, "cell_17-30_naive", "run0.csv")
        assert open(fa, "rb").read() == open(fb, "rb").read()

    def test_rerun_from_resolved_config_reproduces(self, tmp_path, tiny_cfg_file):
        a = str(tmp_path / "a")
        run_cli("train", "--out", a, "--config", tiny_cfg_file, "--seed", "5")
        b = str(tmp_path / "b")
        run_cli("train", "--out", b, "--config", os.path.join(a, "config.cfg"))
        fa = os.path.join(a, "cell_17-30_naive", "run0.csv")
        fb = os.path.join(b, "cell_17-30_naive", "run0.csv")
        assert open(fa, "rb").read() == open(fb, "rb").read()

    def test_missing_config_file_exit_1(self, tmp_path, capsys):
        code = run_cli("train", "--out", str(tmp_path), "--config", "/no/such.cfg")
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("hyper.gamma = 2.0\n")
        assert run_cli("train", "--out", str(tmp_path / "o"), "--config", str(bad)) == 1


class TestBaseline:
    def test_baseline_report(self, tmp_path, capsys):
        cfg = tmp_path / "b.cfg"
        cfg.write_text("baseline.hours = 0.01\n")
        out = str(tmp_path / "out")
        assert run_cli("baseline", "--out", out, "--config", str(cfg)) == 0
        text = open(os.path.join(out, "baseline.txt")).read()
        assert "baseline.naive.collisions = 0" in text
        assert "baseline.robust.mean_th = " in text


class TestReplayAndReport:
    def test_report_and_replay_on_fresh_logs(self, tmp_path, tiny_cfg_file, capsys):
        out = str(tmp_path / "out")
        run_cli("train", "--out", out, "--config", tiny_cfg_file)
        capsys.readouterr()
        assert run_cli("report", "--out", out) == 0
        seen = capsys.readouterr().out
        assert "mean_collisions" in seen
        series = os.path.join(out, "min_th_series_17-30_naive.csv")
        assert os.path.isfile(series)
        header, first, second = open(series).read().splitlines()[:3]
        assert header == "episode,mean_min_th_s,std_min_th_s"
        # single run -> zero standard deviation series
        assert first.endswith(",0") and second.endswith(",0")
        assert run_cli("replay", "--out", out) == 0

    def test_report_refuses_partial_logs(self, tmp_path, tiny_cfg_file, capsys):
        out = str(tmp_path / "out")
        run_cli("train", "--out", out, "--config", tiny_cfg_file)
        csv_path = os.path.join(out, "cell_17-30_naive", "run0.csv")
        lines = open(csv_path).read().splitlines()
        with open(csv_path, "w") as fh:
            fh.write("\n".join(lines[:-1]) + "\n")  # drop the final episode
        capsys.readouterr()
        assert run_cli("report", "--out", out) == 2
        assert "partial log" in capsys.readouterr().err

    def test_report_needs_config(self, tmp_path, capsys):
        os.makedirs(tmp_path / "empty", exist_ok=True)
        assert run_cli("report", "--out", str(tmp_path / "empty")) == 2
        assert "config.cfg" in capsys.readouterr().err

    def test_replay_missing_dir(self, capsys):
        assert run_cli("replay", "--out", "/no/such/dir") == 2


class TestArgErrors:
    def test_unknown_subcommand(self, capsys):
        assert run_cli("bogus") == 1

    def test_no_subcommand(self, capsys):
        assert run_cli() == 1

    def test_bad_scale(self, tmp_path, capsys):
        assert run_cli("train", "--out", str(tmp_path), "--scale", "galactic") == 1
