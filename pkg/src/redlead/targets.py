"""Follower policies under test.

Every follower sees only a FollowerObservation and returns an acceleration
command in m/s^2 — the black-box premise: no access to world state, road
friction, or the adversary. Two scripted references ship with the package:

* NaiveTracker — proportional control on headway error alone. It is
  deliberately blind to relative velocity, so it keeps accelerating toward
  the 2 s target headway even while closing fast on a decelerating leader.
* RobustFollower — constant-time-gap law with a relative-velocity term and
  a hard time-to-collision brake override.

A trained network saved in the NNETv1 format can be attacked through
NetworkFollower.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

COMMAND_MIN = -6.0  # m/s^2, shared command envelope for all followers
COMMAND_MAX = 2.0


@dataclass(frozen=True)
class FollowerObservation:
    v_f: float  # follower speed, m/s
    v_rel: float  # lead minus follower, m/s
    t_h: float  # time headway, s
    a_f: float = 0.0  # follower acceleration, m/s^2 (unused by some policies)


def _clamp(a, lo=COMMAND_MIN, hi=COMMAND_MAX):
    return lo if a < lo else (hi if a > hi else a)


@dataclass(frozen=True)
class NaiveTrackerParams:
    target_headway: float = 2.0  # s
    headway_gain: float = 1.4  # (m/s^2) per second of headway error
    accel_limit: float = 2.0  # m/s^2
    brake_limit: float = -6.0  # m/s^2

    def __post_init__(self):
        if not self.brake_limit <= 0.0 <= self.accel_limit:
            raise ConfigurationError("naive tracker limits must bracket zero")


def naive_tracker(obs, p):
    """Headway-error proportional command; ignores v_rel by construction."""
    return _clamp(
        p.headway_gain * (obs.t_h - p.target_headway), p.brake_limit, p.accel_limit
    )


@dataclass(frozen=True)
class RobustFollowerParams:
    target_headway: float = 2.0  # s
    gap_gain: float = 0.25  # 1/s^2, on spacing error in meters
    speed_gain: float = 0.8  # 1/s, on relative velocity
    emergency_ttc: float = 3.0  # s
    max_brake: float = -6.0  # m/s^2

    def __post_init__(self):
        if self.emergency_ttc <= 0.0:
            raise ConfigurationError("emergency_ttc must be positive")
        if self.max_brake > 0.0:
            raise ConfigurationError("max_brake must be <= 0")


def robust_follower(obs, p):
    """Constant-time-gap law with a hard TTC brake override."""
    gap_est = obs.t_h * max(obs.v_f, 0.1)
    if obs.v_rel < 0.0:
        ttc = gap_est / max(-obs.v_rel, 1e-6)
        if ttc < p.emergency_ttc:
            return p.max_brake
    spacing_error = (obs.t_h - p.target_headway) * obs.v_f
    return _clamp(p.gap_gain * spacing_error + p.speed_gain * obs.v_rel)


class FollowerPolicy:
    """Stateful wrapper interface: observe() -> command, reset() at episode start."""

    name = "follower"

    def observe(self, obs):
        raise NotImplementedError

    def reset(self):
        pass


class NaiveTracker(FollowerPolicy):
    name = "naive"

    def __init__(self, params=NaiveTrackerParams()):
        self.params = params

    def observe(self, obs):
        return naive_tracker(obs, self.params)


class RobustFollower(FollowerPolicy):
    name = "robust"

    def __init__(self, params=RobustFollowerParams()):
        self.params = params

    def observe(self, obs):
        return robust_follower(obs, self.params)


class NetworkFollower(FollowerPolicy):
    """Neural follower loaded from an NNETv1 file.

    3-input networks see [v_f, v_rel, t_h]; 4-input ones additionally see
    their own acceleration a_f. The single tanh head is mapped affinely to
    the [-6, 2] m/s^2 command envelope.
    """

    name = "network"

    def __init__(self, network):
        if network.in_size not in (3, 4):
            raise ConfigurationError(
                f"follower network must take 3 or 4 inputs, takes {network.in_size}"
            )
        if len(network.heads) != 1 or network.heads[0].out_size != 1:
            raise ConfigurationError("follower network must have one scalar head")
        self.network = network
        self._state = network.zero_state()

    def reset(self):
        self._state = self.network.zero_state()

    def observe(self, obs):
        if self.network.in_size == 3:
            x = np.array([obs.v_f, obs.v_rel, obs.t_h])
        else:
            x = np.array([obs.v_f, obs.a_f, obs.v_rel, obs.t_h])
        (out,), self._state = self.network.forward(x, self._state)
        # affine map from the tanh range; clipped first so a non-tanh head
        # still lands inside the command envelope
        u = min(max(float(out[0]), -1.0), 1.0)
        return COMMAND_MIN + (u + 1.0) / 2.0 * (COMMAND_MAX - COMMAND_MIN)


def network_follower(obs, network):
    """One-shot stateless query of a neural follower (no recurrent carry)."""
    return NetworkFollower(network).observe(obs)
