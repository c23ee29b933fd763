"""The MDP the adversarial lead vehicle interacts with.

Episode protocol: friction is drawn per episode from a 25-point grid and
hidden from both agents; both vehicles start at the same speed with the gap
at the 2 s target headway; the raw policy action is mapped to a lead
acceleration in [-6, 2] m/s^2 and additionally clipped so the lead speed
stays inside the configured range; the reward min(1/t_h, 100) is computed
from the post-step headway; episodes end on collision or after 7500 steps
(5 minutes of 40 ms steps).
"""

from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .dynamics import SimParams, VehicleState, WorldState
from .errors import UsageError
from .targets import FollowerObservation

EPISODE_STEPS = 7500  # 5 min at 40 ms

A_LEAD_MIN = -6.0  # m/s^2
A_LEAD_MAX = 2.0

PAPER_V_RANGES = ((17.0, 30.0), (12.0, 35.0), (12.0, 30.0), (17.0, 35.0))


@dataclass(frozen=True)
class EnvConfig:
    v_lead_range: tuple = (17.0, 30.0)  # m/s
    a_lead_range: tuple = (A_LEAD_MIN, A_LEAD_MAX)  # m/s^2
    episode_steps: int = EPISODE_STEPS
    friction_grid: tuple = dynamics.FRICTION_GRID
    init_headway: float = 2.0  # s; both vehicles start at this gap in time
    sim: SimParams = field(default_factory=SimParams)

    def __post_init__(self):
        if not self.v_lead_range[0] < self.v_lead_range[1]:
            raise ValueError("v_lead_range must satisfy v_min < v_max")
        if self.episode_steps <= 0:
            raise ValueError("episode_steps must be positive")


@dataclass(frozen=True)
class AdversaryObservation:
    v_f: float
    a_f: float
    v_rel: float
    t_h: float


@dataclass(frozen=True)
class StepOutcome:
    observation: AdversaryObservation
    reward: float
    done: bool
    done_reason: str | None  # "collision" | "timeout" when done
    info: dict


def reset(config, rng):
    """Sample an initial world; returns (WorldState, AdversaryObservation)."""
    cof = config.friction_grid[rng.integers(len(config.friction_grid))]
    v0 = rng.uniform(*config.v_lead_range)
    gap0 = config.init_headway * v0
    world = WorldState(
        lead=VehicleState(position=gap0, velocity=v0),
        follower=VehicleState(position=0.0, velocity=v0),
        cof=cof,
    )
    return world, _observe(world, config)


def _observe(world, config):
    return AdversaryObservation(
        v_f=world.follower.velocity,
        a_f=world.follower.acceleration,
        v_rel=world.lead.velocity - world.follower.velocity,
        t_h=dynamics.headway(world, config.sim),
    )


def scale_action(u, config=EnvConfig()):
    """Map a raw policy sample through clip to [-1,1] onto the lead envelope."""
    u = min(max(u, -1.0), 1.0)
    lo, hi = config.a_lead_range
    return lo + (u + 1.0) / 2.0 * (hi - lo)


def reward(t_h):
    """min(1/t_h, 100); capped so the signal stays finite as t_h -> 0."""
    if t_h < 0.0:
        raise ValueError("headway must be non-negative")
    if t_h <= 0.01:
        return 100.0
    return min(1.0 / t_h, 100.0)


def normalize_obs(obs):
    """Fixed affine scaling of the 4-vector into roughly [-1, 1] per component."""
    return np.array(
        [obs.v_f / 40.0, obs.a_f / 6.0, obs.v_rel / 20.0, min(obs.t_h, 10.0) / 10.0]
    )


def _episode_finished(world, config):
    return dynamics.collision_check(world) or world.step_index >= config.episode_steps


def env_step(world, u_raw, follower, config):
    """One environment transition; returns (new WorldState, StepOutcome)."""
    if _episode_finished(world, config):
        raise UsageError("episode already finished; reset before stepping")

    a_cmd = scale_action(u_raw, config)
    # keep the successor lead velocity inside the configured range
    dt = config.sim.dt
    v = world.lead.velocity
    v_min, v_max = config.v_lead_range
    a_lo = (v_min - v) / dt
    a_hi = (v_max - v) / dt
    a_lead = min(max(a_cmd, a_lo), a_hi)

    f_obs = FollowerObservation(
        v_f=world.follower.velocity,
        v_rel=world.lead.velocity - world.follower.velocity,
        t_h=dynamics.headway(world, config.sim),
        a_f=world.follower.acceleration,
    )
    a_follow_cmd = follower.observe(f_obs)

    new_world = dynamics.step(world, a_lead, a_follow_cmd, config.sim)
    t_h = dynamics.headway(new_world, config.sim)
    r = reward(t_h)

    collided = dynamics.collision_check(new_world)
    timeout = new_world.step_index >= config.episode_steps
    done = collided or timeout
    outcome = StepOutcome(
        observation=_observe(new_world, config),
        reward=r,
        done=done,
        done_reason="collision" if collided else ("timeout" if timeout else None),
        info={
            "gap": dynamics.gap(new_world),
            "t_h": t_h,
            "v_lead": new_world.lead.velocity,
            "v_follow": new_world.follower.velocity,
            "a_lead_cmd": a_cmd,
            "a_lead_applied": new_world.lead.acceleration,
            "a_follow_cmd": a_follow_cmd,
            "a_follow_applied": new_world.follower.acceleration,
        },
    )
    return new_world, outcome


class AdversaryEnv:
    """Stateful convenience wrapper used by the trainer."""

    def __init__(self, config, follower, rng):
        self.config = config
        self.follower = follower
        self.rng = rng
        self.world = None

    def reset(self):
        self.world, obs = reset(self.config, self.rng)
        self.follower.reset()
        return obs

    def step(self, u_raw):
        self.world, outcome = env_step(self.world, u_raw, self.follower, self.config)
        return outcome
