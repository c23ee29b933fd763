"""Flat key-value experiment configuration.

The format is deliberately minimal: one `section.key = value` per line,
`#` comments, blank lines ignored. An empty file yields the full default
configuration. Unknown keys are rejected with their line number so typos
fail loudly before any simulation starts.

Example::

    env.v_lead_min = 17
    env.v_lead_max = 30
    hyper.gamma = 0.99
    experiment.follower = naive
"""

from dataclasses import dataclass, field, fields, replace

from .a2c import Hyperparams
from .env import PAPER_V_RANGES, EnvConfig
from .errors import ConfigurationError
from .targets import NaiveTrackerParams, RobustFollowerParams

#: (runs_per_cell, episodes_per_run, baseline_hours) per --scale choice
SCALES = {
    "desk": (5, 500, 1.0),
    "paper": (5, 2500, 10.0),
}

FOLLOWER_CHOICES = ("naive", "robust")


@dataclass(frozen=True)
class BaselineConfig:
    """Manual-baseline driving test parameters.

    The scripted lead keeps braking events bounded (short full-brake
    bursts, bounded step-brake speed sheds) so that honest driving does
    not by itself exhaust the naive follower's proportional braking —
    exposing that weakness is the adversary's job, not the script's.
    """

    hours: float = 1.0
    v_min: float = 17.0
    v_max: float = 40.0
    dwell_min_s: float = 10.0
    dwell_max_s: float = 60.0
    estop_min_s: float = 0.4  # duration of the -6 m/s^2 burst
    estop_max_s: float = 0.8
    brake_dv_max: float = 5.0  # max speed shed by a step-brake maneuver
    brake_mag_max: float = 1.5  # max step-brake deceleration, m/s^2
    sine_amp_max: float = 1.0  # max sinusoidal acceleration amplitude, m/s^2

    def __post_init__(self):
        if self.hours <= 0.0:
            raise ConfigurationError("baseline.hours must be positive")
        if not 0.0 < self.dwell_min_s <= self.dwell_max_s:
            raise ConfigurationError("baseline dwell range must be ordered and positive")
        if not 0.0 < self.estop_min_s <= self.estop_max_s:
            raise ConfigurationError("baseline estop range must be ordered and positive")
        if not self.v_min < self.v_max:
            raise ConfigurationError("baseline velocity range must be ordered")


@dataclass(frozen=True)
class ExperimentConfig:
    follower: str = "naive"
    v_ranges: tuple = PAPER_V_RANGES
    runs_per_cell: int = 5
    episodes_per_run: int = 500
    base_seed: int = 0
    checkpoint_every: int = 0  # 0 disables periodic actor snapshots

    def __post_init__(self):
        if self.follower not in FOLLOWER_CHOICES:
            raise ConfigurationError(
                f"experiment.follower must be one of {FOLLOWER_CHOICES}, "
                f"got {self.follower!r}"
            )
        if self.runs_per_cell < 1:
            raise ConfigurationError("experiment.runs_per_cell must be >= 1")
        if self.episodes_per_run < 0:
            raise ConfigurationError("experiment.episodes_per_run must be >= 0")
        for lo, hi in self.v_ranges:
            if not 0.0 < lo < hi:
                raise ConfigurationError(
                    f"velocity range ({lo}, {hi}) must satisfy 0 < min < max"
                )


@dataclass(frozen=True)
class FullConfig:
    env: EnvConfig = field(default_factory=EnvConfig)
    hyper: Hyperparams = field(default_factory=Hyperparams)
    naive: NaiveTrackerParams = field(default_factory=NaiveTrackerParams)
    robust: RobustFollowerParams = field(default_factory=RobustFollowerParams)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)


def _parse_ranges(text):
    """'17:30,12:35' -> ((17.0, 30.0), (12.0, 35.0))."""
    ranges = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise ValueError(f"range {part!r} must look like min:max")
        ranges.append((float(lo), float(hi)))
    return tuple(ranges)


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (section attribute on FullConfig, field name, parser)
_KEYS = {}


def _register(section, dataclass_type, renames=(), parsers=(), skip=()):
    renames = dict(renames)
    parsers = dict(parsers)
    for f in fields(dataclass_type):
        if f.name in skip:
            continue
        public = renames.get(f.name, f.name)
        parser = parsers.get(f.name, f.type if callable(f.type) else float)
        _KEYS[f"{section}.{public}"] = (section, f.name, parser)


_register(
    "env",
    EnvConfig,
    parsers={"episode_steps": int},
    skip=("v_lead_range", "a_lead_range", "friction_grid", "sim"),
)
_KEYS["env.v_lead_min"] = ("env", "v_lead_min", float)
_KEYS["env.v_lead_max"] = ("env", "v_lead_max", float)
_register(
    "hyper",
    Hyperparams,
    parsers={"rollout": int},
)
_register("naive", NaiveTrackerParams)
_register("robust", RobustFollowerParams)
_register(
    "experiment",
    ExperimentConfig,
    parsers={
        "follower": str.strip,
        "v_ranges": _parse_ranges,
        "runs_per_cell": int,
        "episodes_per_run": int,
        "base_seed": int,
        "checkpoint_every": int,
    },
)
_register("baseline", BaselineConfig)


def parse_config_text(text, scale=None, source="<config>"):
    """Parse flat key-value configuration text into a FullConfig.

    scale, when given, selects the desk/paper experiment sizes as
    defaults; explicit keys in the text still win.
    """
    overrides = {}  # section -> {field: value}
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigurationError(
                f"{source}:{lineno}: expected 'section.key = value', got {raw.strip()!r}"
            )
        if key not in _KEYS and key not in ("env.v_lead_min", "env.v_lead_max"):
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigurationError(
                f"{source}:{lineno}: duplicate key {key!r} (first set on line {seen[key]})"
            )
        seen[key] = lineno
        section, attr, parser = _KEYS[key]
        try:
            parsed = parser(value)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(
                f"{source}:{lineno}: bad value for {key}: {exc}"
            ) from None
        overrides.setdefault(section, {})[attr] = parsed

    if scale is not None:
        if scale not in SCALES:
            raise ConfigurationError(f"scale must be one of {tuple(SCALES)}, got {scale!r}")
        runs, episodes, hours = SCALES[scale]
        exp = overrides.setdefault("experiment", {})
        exp.setdefault("runs_per_cell", runs)
        exp.setdefault("episodes_per_run", episodes)
        overrides.setdefault("baseline", {}).setdefault("hours", hours)

    env_over = overrides.get("env", {})
    v_lo = env_over.pop("v_lead_min", None)
    v_hi = env_over.pop("v_lead_max", None)
    cfg = FullConfig()
    try:
        env = cfg.env
        if v_lo is not None or v_hi is not None:
            lo = v_lo if v_lo is not None else env.v_lead_range[0]
            hi = v_hi if v_hi is not None else env.v_lead_range[1]
            env = replace(env, v_lead_range=(lo, hi))
        if env_over:
            env = replace(env, **env_over)
        return FullConfig(
            env=env,
            hyper=replace(cfg.hyper, **overrides.get("hyper", {})),
            naive=replace(cfg.naive, **overrides.get("naive", {})),
            robust=replace(cfg.robust, **overrides.get("robust", {})),
            experiment=replace(cfg.experiment, **overrides.get("experiment", {})),
            baseline=replace(cfg.baseline, **overrides.get("baseline", {})),
        )
    except (ValueError, ConfigurationError) as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def parse_config(path, scale=None):
    """Read and validate a configuration file; empty file = full defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, scale=scale, source=str(path))


def serialize_config(cfg):
    """Render a FullConfig back into the flat key-value format.

    The output parses back to an identical configuration, so the file
    written next to a run's logs fully reproduces that run.
    """
    lines = ["# resolved configuration (all values explicit)"]
    env = cfg.env
    lines.append(f"env.v_lead_min = {env.v_lead_range[0]!r}")
    lines.append(f"env.v_lead_max = {env.v_lead_range[1]!r}")
    lines.append(f"env.episode_steps = {env.episode_steps}")
    lines.append(f"env.init_headway = {env.init_headway!r}")
    for section in ("hyper", "naive", "robust", "baseline"):
        obj = getattr(cfg, section)
        for f in fields(obj):
            lines.append(f"{section}.{f.name} = {getattr(obj, f.name)!r}")
    exp = cfg.experiment
    ranges = ",".join(f"{lo!r}:{hi!r}" for lo, hi in exp.v_ranges)
    lines.append(f"experiment.follower = {exp.follower}")
    lines.append(f"experiment.v_ranges = {ranges}")
    lines.append(f"experiment.runs_per_cell = {exp.runs_per_cell}")
    lines.append(f"experiment.episodes_per_run = {exp.episodes_per_run}")
    lines.append(f"experiment.base_seed = {exp.base_seed}")
    lines.append(f"experiment.checkpoint_every = {exp.checkpoint_every}")
    return "\n".join(lines) + "\n"
