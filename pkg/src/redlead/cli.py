"""Command-line front end: train, baseline, replay, report.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime/I-O
error. Every training invocation writes its fully resolved configuration
next to the logs, so any run can be reproduced from its output directory
alone.
"""

import argparse
import csv
import os
import sys

import numpy as np

from .a2c import EpisodeRecord
from .config import SCALES, parse_config, parse_config_text, serialize_config
from .errors import ConfigurationError, UsageError
from .harness import (
    EPISODE_FIELDS,
    RunSummary,
    baseline_report,
    extract_replays,
    fmt,
    make_follower,
    manual_baseline,
    run_experiment,
    summary_report,
)


def _load_config(args):
    if args.config is not None:
        cfg = parse_config(args.config, scale=args.scale)
    else:
        cfg = parse_config_text("", scale=args.scale, source="<defaults>")
    if args.seed is not None:
        import dataclasses

        cfg = dataclasses.replace(
            cfg, experiment=dataclasses.replace(cfg.experiment, base_seed=args.seed)
        )
    return cfg


def cmd_train(args):
    cfg = _load_config(args)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))

    def progress(v_range, follower, run_index):
        print(
            f"training {follower} v_lead [{v_range[0]:g},{v_range[1]:g}] "
            f"run {run_index} ...",
            flush=True,
        )

    results = run_experiment(cfg, out_dir=args.out, progress=progress)
    report = summary_report(results)
    with open(os.path.join(args.out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(report)
    print(report, end="")
    return 0


def cmd_baseline(args):
    cfg = _load_config(args)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "config.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))
    reports = []
    for follower_id, name in enumerate(("naive", "robust")):
        follower = make_follower(name, cfg)
        rng = np.random.default_rng(
            np.random.SeedSequence(
                entropy=[cfg.experiment.base_seed, 0xBA5E, follower_id]
            )
        )
        stats = manual_baseline(follower, cfg.baseline.hours, rng, cfg.baseline)
        reports.append(baseline_report(name, stats))
    text = "".join(reports)
    with open(os.path.join(args.out, "baseline.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(text, end="")
    return 0


def cmd_replay(args):
    replays = extract_replays(args.out)
    if not replays:
        print("no collision replays found")
        return 0
    for r in replays:
        final = r.rows[-1]
        print(
            f"cell [{r.v_range[0]:g},{r.v_range[1]:g}] {r.follower} "
            f"run {r.run_index} episode {r.episode}: {len(r.rows)} steps, "
            f"final gap {fmt(float(final[8]))} m, "
            f"v_lead {fmt(float(final[2]))} vs v_follow {fmt(float(final[3]))} m/s"
        )
    print(f"{len(replays)} collision replays")
    return 0


def _read_run_csv(path):
    episodes = []
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != EPISODE_FIELDS:
            raise UsageError(f"{path}: unexpected episode CSV header {header}")
        for row in reader:
            if len(row) != len(EPISODE_FIELDS):
                raise UsageError(f"{path}: malformed row {row}")
            episodes.append(
                EpisodeRecord(
                    episode=int(row[0]),
                    cof=float(row[1]),
                    min_th=float(row[2]),
                    total_reward=float(row[3]),
                    steps=int(row[4]),
                    collision=row[5] == "1",
                    first_collision_step=int(row[6]) if row[6] else None,
                )
            )
    return episodes


def cmd_report(args):
    cfg_path = os.path.join(args.out, "config.cfg")
    if not os.path.isfile(cfg_path):
        raise UsageError(
            f"{args.out}: no config.cfg found; is this a train output directory?"
        )
    cfg = parse_config(cfg_path)
    expected = cfg.experiment.episodes_per_run

    results = {}
    for cell_name in sorted(os.listdir(args.out)):
        cell_path = os.path.join(args.out, cell_name)
        if not (os.path.isdir(cell_path) and cell_name.startswith("cell_")):
            continue
        _, ranges, follower = cell_name.split("_", 2)
        lo, hi = (float(x) for x in ranges.split("-"))
        run_files = sorted(
            f for f in os.listdir(cell_path)
            if f.startswith("run") and f.endswith(".csv") and "_" not in f
        )
        summaries = []
        series = []
        for f in run_files:
            episodes = _read_run_csv(os.path.join(cell_path, f))
            if len(episodes) != expected:
                raise UsageError(
                    f"{os.path.join(cell_path, f)}: partial log — "
                    f"{len(episodes)} episodes, configuration says {expected}; "
                    "the run was interrupted, re-run training before reporting"
                )
            run_index = int(f[3:-4])
            summaries.append(RunSummary((lo, hi), follower, run_index, episodes))
            series.append([e.min_th for e in episodes])
        if not summaries:
            continue
        results[((lo, hi), follower)] = summaries

        arr = np.array(series)  # runs x episodes
        fig_path = os.path.join(args.out, f"min_th_series_{ranges}_{follower}.csv")
        with open(fig_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["episode", "mean_min_th_s", "std_min_th_s"])
            means = arr.mean(axis=0)
            stds = arr.std(axis=0)
            for ep in range(arr.shape[1]):
                w.writerow([ep, fmt(float(means[ep])), fmt(float(stds[ep]))])
        print(f"wrote {fig_path}")

    if not results:
        raise UsageError(f"{args.out}: no run CSVs found")

    report = summary_report(results)
    report_path = os.path.join(args.out, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report)
    print(report, end="")

    baseline_path = os.path.join(args.out, "baseline.txt")
    if os.path.isfile(baseline_path):
        with open(baseline_path, encoding="utf-8") as fh:
            print(fh.read(), end="")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we reserve 2 for I/O
        self.print_usage(sys.stderr)
        raise SystemExit(self.prog + ": error: " + message)


def build_parser():
    parser = _Parser(
        prog="redlead",
        description="Adversarial stress testing of vehicle-following controllers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, needs_config in (
        ("train", cmd_train, True),
        ("baseline", cmd_baseline, True),
        ("replay", cmd_replay, False),
        ("report", cmd_report, False),
    ):
        p = sub.add_parser(name)
        p.set_defaults(func=func)
        p.add_argument("--out", required=True, help="output/log directory")
        if needs_config:
            p.add_argument("--config", help="flat key-value config file")
            p.add_argument("--seed", type=int, help="override experiment.base_seed")
            p.add_argument(
                "--scale",
                choices=sorted(SCALES),
                default="desk",
                help="experiment size defaults (desk: 5x500 runs, 1 h baseline; "
                "paper: 5x2500, 10 h)",
            )
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        print(exc.code, file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"redlead: config error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"redlead: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"redlead: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
