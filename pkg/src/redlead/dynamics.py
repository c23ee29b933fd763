"""Two-vehicle longitudinal point-mass simulator.

Fixed 40 ms steps, semi-implicit Euler, accelerations capped by the road
friction envelope (|a| <= cof * g) and by the no-reversing rule (v >= 0).
The gap is bumper-to-bumper between point vehicles; vehicle geometry is
folded into the initial gap and the collision threshold gap <= 0.
"""

from dataclasses import dataclass, replace

GRAVITY = 9.80665  # m/s^2
DT = 0.040  # s

FRICTION_GRID = tuple(0.4 + 0.025 * k for k in range(25))


@dataclass(frozen=True)
class VehicleState:
    position: float  # m
    velocity: float  # m/s
    acceleration: float = 0.0  # m/s^2, last applied (post-clip) value


@dataclass(frozen=True)
class WorldState:
    lead: VehicleState
    follower: VehicleState
    cof: float
    step_index: int = 0


@dataclass(frozen=True)
class SimParams:
    dt: float = DT
    gravity: float = GRAVITY
    headway_cap: float = 100.0  # s; keeps 1/t_h rewards >= 0.01
    v_floor: float = 0.1  # m/s, denominator floor for the headway ratio


def friction_limit(a_cmd, cof, gravity=GRAVITY):
    """Clamp a commanded acceleration to the friction envelope [-cof*g, cof*g]."""
    lim = cof * gravity
    if a_cmd > lim:
        return lim
    if a_cmd < -lim:
        return -lim
    return a_cmd


def _advance(vehicle, a_cmd, cof, params):
    a = friction_limit(a_cmd, cof, params.gravity)
    # no reversing: clip deceleration so velocity stays >= 0
    if vehicle.velocity + a * params.dt < 0.0:
        a = -vehicle.velocity / params.dt
    v = vehicle.velocity + a * params.dt
    x = vehicle.position + v * params.dt
    return VehicleState(x, v, a)


def step(world, a_lead_cmd, a_follow_cmd, params=SimParams()):
    """Advance both vehicles one step; returns the successor WorldState."""
    return replace(
        world,
        lead=_advance(world.lead, a_lead_cmd, world.cof, params),
        follower=_advance(world.follower, a_follow_cmd, world.cof, params),
        step_index=world.step_index + 1,
    )


def gap(world):
    """Relative distance lead - follower in meters (negative after a collision)."""
    return world.lead.position - world.follower.position


def headway(world, params=SimParams()):
    """Time headway: gap over follower speed, floored and capped to stay finite."""
    th = gap(world) / max(world.follower.velocity, params.v_floor)
    if th < 0.0:
        return 0.0
    if th > params.headway_cap:
        return params.headway_cap
    return th


def collision_check(world):
    return gap(world) <= 0.0
