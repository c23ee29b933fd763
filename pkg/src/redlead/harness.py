"""Experiment orchestration and the manual-baseline driving test.

Runs the (velocity-range x follower) training matrix with seeded,
reproducible runs; writes one episode CSV per run plus a full step trace
for every collision episode; aggregates per-cell collision statistics;
and drives the scripted manual baseline that the adversarial results are
compared against.
"""

import csv
import dataclasses
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .a2c import TRACE_FIELDS, Hyperparams, train_run
from .config import BaselineConfig, FullConfig
from .env import AdversaryEnv, EnvConfig
from .errors import ConfigurationError, UsageError
from .nnet import save_weights
from .targets import NaiveTracker, RobustFollower

EPISODE_FIELDS = (
    "episode",
    "cof",
    "min_th_s",
    "return",
    "steps",
    "collision",
    "first_collision_step",
)


def fmt(x):
    """Serialize one CSV value; floats get 9 significant digits."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".9g")
    if x is None:
        return ""
    return str(x)


def make_follower(name, cfg):
    if name == "naive":
        return NaiveTracker(cfg.naive)
    if name == "robust":
        return RobustFollower(cfg.robust)
    raise ConfigurationError(f"unknown follower {name!r}")


def run_seed(base_seed, v_range, follower_name, run_index):
    """Content-derived seed: independent of cell execution order."""
    return np.random.SeedSequence(
        entropy=[
            int(base_seed),
            int(round(v_range[0] * 1000)),
            int(round(v_range[1] * 1000)),
            0 if follower_name == "naive" else 1,
            int(run_index),
        ]
    )


@dataclass
class RunSummary:
    v_range: tuple
    follower: str
    run_index: int
    episodes: list  # EpisodeRecord series

    @property
    def collisions(self):
        return sum(1 for e in self.episodes if e.collision)

    @property
    def episodes_to_first_collision(self):
        for e in self.episodes:
            if e.collision:
                return e.episode + 1
        return None


def collision_stats(summaries):
    """(mean collisions, mean episodes-to-first) over a cell's runs.

    Zero-collision runs carry no first-collision episode; they are left
    out of the second mean, which is None when no run collided at all.
    """
    if not summaries:
        raise UsageError("collision_stats needs at least one run summary")
    mean_collisions = sum(s.collisions for s in summaries) / len(summaries)
    firsts = [
        s.episodes_to_first_collision
        for s in summaries
        if s.episodes_to_first_collision is not None
    ]
    mean_first = sum(firsts) / len(firsts) if firsts else None
    return mean_collisions, mean_first


def _cell_dir(out_dir, v_range, follower_name):
    return os.path.join(
        out_dir, f"cell_{v_range[0]:g}-{v_range[1]:g}_{follower_name}"
    )


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def run_one(cfg, v_range, follower_name, run_index, out_dir=None):
    """Train one seeded adversary run; optionally write its logs."""
    env_config = dataclasses.replace(cfg.env, v_lead_range=v_range)
    follower = make_follower(follower_name, cfg)
    seed = run_seed(cfg.experiment.base_seed, v_range, follower_name, run_index)

    cell_dir = None
    trace_sink = None
    checkpoint_sink = None
    if out_dir is not None:
        cell_dir = _cell_dir(out_dir, v_range, follower_name)
        os.makedirs(cell_dir, exist_ok=True)

        def trace_sink(episode, rows):
            path = os.path.join(cell_dir, f"run{run_index}_ep{episode}_trace.csv")
            _write_csv(path, TRACE_FIELDS, rows)

        def checkpoint_sink(episode, net):
            path = os.path.join(
                cell_dir, f"run{run_index}_actor_ep{episode + 1}.nnet"
            )
            save_weights(net, path)

    actor, log = train_run(
        env_config,
        follower,
        cfg.hyper,
        seed,
        cfg.experiment.episodes_per_run,
        trace_sink=trace_sink,
        checkpoint_every=cfg.experiment.checkpoint_every or None,
        checkpoint_sink=checkpoint_sink,
    )

    summary = RunSummary(v_range, follower_name, run_index, log.episodes)
    if cell_dir is not None:
        rows = [
            (
                e.episode,
                e.cof,
                e.min_th,
                e.total_reward,
                e.steps,
                e.collision,
                e.first_collision_step,
            )
            for e in log.episodes
        ]
        _write_csv(
            os.path.join(cell_dir, f"run{run_index}.csv"), EPISODE_FIELDS, rows
        )
        save_weights(actor, os.path.join(cell_dir, f"run{run_index}_actor.nnet"))
    return actor, summary


def run_experiment(cfg, out_dir=None, progress=None):
    """Execute the full training matrix; returns {cell: [RunSummary, ...]}.

    Cells are every (v_range, follower) pair from the experiment config.
    Seeds derive from cell content, so execution order is irrelevant.
    """
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        try:
            with open(probe, "w") as fh:
                fh.write("")
            os.remove(probe)
        except OSError as exc:
            raise UsageError(f"output directory not writable: {exc}") from None

    results = {}
    for v_range in cfg.experiment.v_ranges:
        cell = (v_range, cfg.experiment.follower)
        results[cell] = []
        for run_index in range(cfg.experiment.runs_per_cell):
            if progress is not None:
                progress(v_range, cfg.experiment.follower, run_index)
            _, summary = run_one(
                cfg, v_range, cfg.experiment.follower, run_index, out_dir
            )
            results[cell].append(summary)
    return results


def summary_report(results):
    """Per-cell means as structured key-value text."""
    out = io.StringIO()
    for (v_range, follower), summaries in results.items():
        mean_col, mean_first = collision_stats(summaries)
        prefix = f"cell.{v_range[0]:g}-{v_range[1]:g}.{follower}"
        out.write(f"{prefix}.runs = {len(summaries)}\n")
        out.write(f"{prefix}.mean_collisions = {fmt(float(mean_col))}\n")
        out.write(
            f"{prefix}.mean_episodes_to_first_collision = "
            f"{'none' if mean_first is None else fmt(float(mean_first))}\n"
        )
        for s in summaries:
            rp = f"{prefix}.run{s.run_index}"
            out.write(f"{rp}.collisions = {s.collisions}\n")
            first = s.episodes_to_first_collision
            out.write(
                f"{rp}.episodes_to_first_collision = "
                f"{'none' if first is None else first}\n"
            )
    return out.getvalue()


# --- manual baseline -------------------------------------------------------

MANEUVERS = ("cruise", "accel", "brake", "sine", "estop")


@dataclass
class BaselineStats:
    """Aggregates of the scripted driving test (None when no steps ran)."""

    steps: int = 0
    collisions: int = 0
    min_x_rel: float = None
    mean_x_rel: float = None
    max_v_rel: float = None
    mean_v_rel: float = None
    min_th: float = None
    mean_th: float = None


@dataclass
class _Accum:
    n: int = 0
    total: float = 0.0
    lo: float = math.inf
    hi: float = -math.inf

    def add(self, x):
        self.n += 1
        self.total += x
        if x < self.lo:
            self.lo = x
        if x > self.hi:
            self.hi = x

    @property
    def mean(self):
        return self.total / self.n if self.n else None


def manual_baseline(follower, duration_hours, rng, bl=BaselineConfig(), sink=None):
    """Scripted randomized lead driving against one follower.

    Maneuvers: constant cruise, step accelerate, step brake (bounded
    speed shed), sinusoidal oscillation, and a short emergency stop at
    -6 m/s^2. Dwell, magnitudes, and the per-episode road friction are
    randomized from the given rng. sink(step, info) is called per step
    when provided. Braking severity is bounded (see BaselineConfig) so
    the scripted script alone stays within what a headway-only follower
    can absorb.
    """
    if duration_hours < 0.0:
        raise UsageError("baseline duration must be >= 0")
    cfg = EnvConfig(v_lead_range=(bl.v_min, bl.v_max))
    total_steps = int(round(duration_hours * 3600.0 / cfg.sim.dt))
    stats = BaselineStats()
    if total_steps == 0:
        return stats

    env = AdversaryEnv(cfg, follower, rng)

    def new_episode():
        env.reset()
        # the manual test uses continuous friction, not the training grid
        env.world = dataclasses.replace(env.world, cof=rng.uniform(0.4, 1.0))

    new_episode()
    x_rel, v_rel, t_h = _Accum(), _Accum(), _Accum()
    steps = 0
    while steps < total_steps:
        man = MANEUVERS[rng.integers(len(MANEUVERS))]
        dwell = int(rng.uniform(bl.dwell_min_s, bl.dwell_max_s) / cfg.sim.dt)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        period = rng.uniform(8.0, 25.0)
        amp = rng.uniform(0.3, bl.sine_amp_max)
        accel = rng.uniform(0.5, 2.0)
        brake = rng.uniform(0.5, bl.brake_mag_max)
        dv_target = rng.uniform(2.0, bl.brake_dv_max)
        estop_steps = int(rng.uniform(bl.estop_min_s, bl.estop_max_s) / cfg.sim.dt)
        v_start = env.world.lead.velocity
        for k in range(dwell):
            if man == "cruise":
                a = 0.0
            elif man == "accel":
                a = accel  # the env's velocity clip handles the top end
            elif man == "brake":
                shed = v_start - env.world.lead.velocity
                a = -brake if shed < dv_target else 0.0
            elif man == "sine":
                a = amp * math.sin(
                    2.0 * math.pi * (steps * cfg.sim.dt) / period + phase
                )
            else:  # estop: brief full brake, then hold the reduced speed
                a = -6.0 if k < estop_steps else 0.0
            assert -6.0 <= a <= 2.0
            u = (a + 2.0) / 4.0  # invert the affine [-1,1] -> [-6,2] action map
            out = env.step(u)
            assert bl.v_min - 1e-9 <= out.info["v_lead"] <= bl.v_max + 1e-9
            steps += 1
            x_rel.add(out.info["gap"])
            v_rel.add(out.info["v_lead"] - out.info["v_follow"])
            t_h.add(out.info["t_h"])
            if sink is not None:
                sink(steps, out.info)
            if out.done:
                if out.done_reason == "collision":
                    stats.collisions += 1
                new_episode()
                break
            if steps >= total_steps:
                break

    stats.steps = steps
    stats.min_x_rel, stats.mean_x_rel = x_rel.lo, x_rel.mean
    stats.max_v_rel, stats.mean_v_rel = v_rel.hi, v_rel.mean
    stats.min_th, stats.mean_th = t_h.lo, t_h.mean
    return stats


def baseline_report(name, stats):
    """BaselineStats as structured key-value text."""
    out = io.StringIO()
    p = f"baseline.{name}"
    out.write(f"{p}.steps = {stats.steps}\n")
    out.write(f"{p}.collisions = {stats.collisions}\n")
    for key in ("min_x_rel", "mean_x_rel", "max_v_rel", "mean_v_rel", "min_th", "mean_th"):
        val = getattr(stats, key)
        out.write(f"{p}.{key} = {'none' if val is None else fmt(float(val))}\n")
    return out.getvalue()


# --- collision replays -----------------------------------------------------


@dataclass
class CollisionReplay:
    v_range: tuple
    follower: str
    run_index: int
    episode: int
    rows: list  # tuples matching TRACE_FIELDS

    def final_gap(self):
        return self.rows[-1][TRACE_FIELDS.index("gap_m")]


def extract_replays(out_dir):
    """Load every collision trace written under an experiment directory.

    Returns replays ordered by (cell directory, run, episode); each ends
    with gap <= 0 by construction of the trace writer.
    """
    replays = []
    if not os.path.isdir(out_dir):
        raise UsageError(f"no such log directory: {out_dir}")
    for cell_name in sorted(os.listdir(out_dir)):
        cell_path = os.path.join(out_dir, cell_name)
        if not (os.path.isdir(cell_path) and cell_name.startswith("cell_")):
            continue
        _, ranges, follower = cell_name.split("_", 2)
        lo, hi = (float(x) for x in ranges.split("-"))
        entries = []
        for fname in os.listdir(cell_path):
            if fname.endswith("_trace.csv") and fname.startswith("run"):
                run_part, ep_part, _ = fname.split("_", 2)
                entries.append((int(run_part[3:]), int(ep_part[2:]), fname))
        for run_index, episode, fname in sorted(entries):
            with open(os.path.join(cell_path, fname), encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                if tuple(header) != TRACE_FIELDS:
                    raise UsageError(f"unexpected trace header in {fname}")
                rows = [
                    tuple(int(r[0]) if i == 0 else float(v) for i, v in enumerate(r))
                    for r in reader
                ]
            replays.append(CollisionReplay((lo, hi), follower, run_index, episode, rows))
    return replays
