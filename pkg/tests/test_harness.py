"""Experiment orchestration: logging, statistics, baseline, replays."""

import csv
import os

import numpy as np
import pytest

from redlead.a2c import EpisodeRecord
from redlead.config import BaselineConfig, ExperimentConfig, FullConfig
from redlead.env import EnvConfig
from redlead.errors import UsageError
from redlead.harness import (
    EPISODE_FIELDS,
    RunSummary,
    baseline_report,
    collision_stats,
    extract_replays,
    fmt,
    manual_baseline,
    run_experiment,
    run_one,
    run_seed,
    summary_report,
)
from redlead.targets import NaiveTracker, RobustFollower


def tiny_config(**exp_kwargs):
    exp = dict(
        follower="naive",
        v_ranges=((17.0, 30.0),),
        runs_per_cell=2,
        episodes_per_run=2,
        base_seed=11,
    )
    exp.update(exp_kwargs)
    return FullConfig(
        env=EnvConfig(episode_steps=200), experiment=ExperimentConfig(**exp)
    )


def record(episode, collision, step=50):
    return EpisodeRecord(
        episode=episode,
        cof=0.5,
        min_th=0.5 if collision else 1.5,
        total_reward=100.0,
        steps=step,
        collision=collision,
        first_collision_step=step if collision else None,
    )


def summary_with(collision_episodes, total=10):
    eps = [record(i, i in collision_episodes) for i in range(total)]
    return RunSummary((17.0, 30.0), "naive", 0, eps)


class TestCollisionStats:
    def test_mean_counts(self):
        sums = [summary_with({1}), summary_with({2, 3}), summary_with({4, 5, 6})]
        mean_col, mean_first = collision_stats(sums)
        assert mean_col == pytest.approx(2.0)
        # firsts are 1-based episode counts: 2, 3, 5
        assert mean_first == pytest.approx((2 + 3 + 5) / 3)

    def test_zero_collision_runs_excluded_from_first_mean(self):
        sums = [summary_with({9}), summary_with(set()), summary_with({19}, total=25)]
        mean_col, mean_first = collision_stats(sums)
        assert mean_col == pytest.approx(2 / 3)
        assert mean_first == pytest.approx((10 + 20) / 2)

    def test_all_clean_runs_give_none(self):
        _, mean_first = collision_stats([summary_with(set()), summary_with(set())])
        assert mean_first is None

    def test_empty_rejected(self):
        with pytest.raises(UsageError):
            collision_stats([])


class TestFormatting:
    def test_nine_significant_digits(self):
        assert fmt(1.0 / 3.0) == "0.333333333"
        assert fmt(1234567891.0) == "1.23456789e+09"

    def test_bool_and_none(self):
        assert fmt(True) == "1"
        assert fmt(False) == "0"
        assert fmt(None) == ""
        assert fmt(42) == "42"


class TestRunSeeds:
    def test_content_derived(self):
        a = run_seed(1, (17.0, 30.0), "naive", 0)
        b = run_seed(1, (17.0, 30.0), "naive", 0)
        assert a.entropy == b.entropy

    def test_distinct_across_runs_and_cells(self):
        seeds = {
            tuple(run_seed(1, rng, fol, run).entropy)
            for rng in ((17.0, 30.0), (12.0, 35.0))
            for fol in ("naive", "robust")
            for run in (0, 1, 2)
        }
        assert len(seeds) == 12


class TestRunExperiment:
    def test_empty_plan(self, tmp_path):
        cfg = tiny_config(v_ranges=())
        assert run_experiment(cfg, out_dir=str(tmp_path)) == {}

    def test_logs_and_determinism(self, tmp_path):
        cfg = tiny_config()
        d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
        r1 = run_experiment(cfg, out_dir=d1)
        r2 = run_experiment(cfg, out_dir=d2)
        ((cell, sums),) = r1.items()
        assert cell == ((17.0, 30.0), "naive")
        assert len(sums) == 2
        cell_dir = "cell_17-30_naive"
        for name in ("run0.csv", "run1.csv", "run0_actor.nnet"):
            b1 = open(os.path.join(d1, cell_dir, name), "rb").read()
            b2 = open(os.path.join(d2, cell_dir, name), "rb").read()
            assert b1 == b2, f"{name} differs between identical runs"
        assert [s.collisions for s in r1[cell]] == [s.collisions for s in r2[cell]]

    def test_episode_csv_schema(self, tmp_path):
        cfg = tiny_config(runs_per_cell=1)
        run_experiment(cfg, out_dir=str(tmp_path))
        path = tmp_path / "cell_17-30_naive" / "run0.csv"
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == EPISODE_FIELDS
        assert len(rows) == 1 + cfg.experiment.episodes_per_run
        assert rows[1][0] == "0"

    def test_cell_order_independent(self, tmp_path):
        fwd = tiny_config(v_ranges=((17.0, 30.0), (12.0, 35.0)), runs_per_cell=1)
        rev = tiny_config(v_ranges=((12.0, 35.0), (17.0, 30.0)), runs_per_cell=1)
        r_fwd = run_experiment(fwd, out_dir=str(tmp_path / "f"))
        r_rev = run_experiment(rev, out_dir=str(tmp_path / "r"))
        for cell in r_fwd:
            a, b = r_fwd[cell][0], r_rev[cell][0]
            assert [e.min_th for e in a.episodes] == [e.min_th for e in b.episodes]

    def test_run_without_output_dir(self):
        cfg = tiny_config(runs_per_cell=1, episodes_per_run=1)
        actor, summary = run_one(cfg, (17.0, 30.0), "naive", 0, out_dir=None)
        assert len(summary.episodes) == 1


class TestSummaryReport:
    def test_key_value_shape(self):
        report = summary_report({((17.0, 30.0), "naive"): [summary_with({1})]})
        lines = dict(
            line.split(" = ") for line in report.strip().splitlines()
        )
        assert lines["cell.17-30.naive.mean_collisions"] == "1"
        assert lines["cell.17-30.naive.run0.episodes_to_first_collision"] == "2"

    def test_none_rendering(self):
        report = summary_report({((17.0, 30.0), "naive"): [summary_with(set())]})
        assert "mean_episodes_to_first_collision = none" in report


class TestManualBaseline:
    def test_zero_duration(self):
        stats = manual_baseline(NaiveTracker(), 0.0, np.random.default_rng(0))
        assert stats.steps == 0
        assert stats.mean_th is None
        assert stats.collisions == 0

    def test_short_run_statistics(self):
        stats = manual_baseline(RobustFollower(), 0.05, np.random.default_rng(8))
        assert stats.steps == int(0.05 * 3600 / 0.04)
        assert stats.min_x_rel <= stats.mean_x_rel
        assert stats.mean_v_rel <= stats.max_v_rel
        assert stats.min_th <= stats.mean_th
        assert stats.collisions == 0

    def test_deterministic_given_rng_seed(self):
        a = manual_baseline(NaiveTracker(), 0.02, np.random.default_rng(5))
        b = manual_baseline(NaiveTracker(), 0.02, np.random.default_rng(5))
        assert a == b

    def test_envelope_asserted_per_step(self):
        seen = []
        bl = BaselineConfig()
        manual_baseline(
            NaiveTracker(),
            0.02,
            np.random.default_rng(13),
            bl,
            sink=lambda step, info: seen.append(info),
        )
        assert seen
        for info in seen:
            assert bl.v_min - 1e-9 <= info["v_lead"] <= bl.v_max + 1e-9
            assert -6.0 <= info["a_lead_cmd"] <= 2.0

    def test_negative_duration_rejected(self):
        with pytest.raises(UsageError):
            manual_baseline(NaiveTracker(), -1.0, np.random.default_rng(0))


class TestReplays:
    def test_missing_directory(self):
        with pytest.raises(UsageError):
            extract_replays("/definitely/not/here")

    def test_no_collisions_empty(self, tmp_path):
        run_experiment(tiny_config(runs_per_cell=1), out_dir=str(tmp_path))
        assert extract_replays(str(tmp_path)) == []

    def test_replays_match_collisions_and_end_at_contact(self, tmp_path):
        # an idle follower guarantees collisions under a braking adversary,
        # exercising trace writing without a long training run
        class Brick(NaiveTracker):
            def observe(self, obs):
                return 0.0

        cfg = tiny_config(runs_per_cell=1, episodes_per_run=3)
        # monkeypatch follower construction via run_one's follower name is
        # fixed; instead train against naive with a tiny env and rely on
        # synthetic traces below
        import redlead.harness as hmod

        orig = hmod.make_follower
        hmod.make_follower = lambda name, c: Brick()
        try:
            results = run_experiment(cfg, out_dir=str(tmp_path))
        finally:
            hmod.make_follower = orig
        ((_, sums),) = results.items()
        total = sum(s.collisions for s in sums)
        replays = extract_replays(str(tmp_path))
        assert len(replays) == total
        for r in replays:
            assert r.final_gap() <= 0.0
            assert r.rows[0][0] == 1  # steps are 1-based
