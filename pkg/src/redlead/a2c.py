"""Advantage actor-critic training of the adversarial lead vehicle.

The actor maps the normalized 4-component observation through three 50-unit
relu6 layers and a 16-unit LSTM to a Gaussian action head (tanh mean,
softplus variance). The critic is a two-layer 50-unit relu6 net with a
linear value head. Both are updated per n-step rollout window from the
bootstrapped advantage; actor gradients flow through the LSTM across the
window (truncated BPTT) and the recurrent state, but not the gradient, is
carried across window boundaries within an episode. The critic has no
recurrence, so its window is evaluated and differentiated as one batch.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .env import AdversaryEnv, normalize_obs
from .nnet import GradientTape, Network, RmsPropState, init_dense, init_lstm

ACTOR_HIDDEN = 50
ACTOR_LAYERS = 3
LSTM_UNITS = 16
CRITIC_HIDDEN = 50
CRITIC_LAYERS = 2
OBS_SIZE = 4


@dataclass(frozen=True)
class Hyperparams:
    gamma: float = 0.99
    beta: float = 1e-4  # entropy coefficient
    lr_actor: float = 1e-4
    lr_critic: float = 1e-2
    rms_alpha: float = 0.9
    rms_eps: float = 1e-10
    rms_momentum: float = 0.0
    rollout: int = 32  # n-step window, also the truncated-BPTT horizon
    var_floor: float = 1e-4

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0,1], got {self.gamma}")
        for name in ("beta", "lr_actor", "lr_critic", "var_floor"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.rollout < 1:
            raise ValueError("rollout length must be >= 1")


def build_actor(rng):
    layers = [init_dense(rng, OBS_SIZE, ACTOR_HIDDEN, "relu6")]
    for _ in range(ACTOR_LAYERS - 1):
        layers.append(init_dense(rng, ACTOR_HIDDEN, ACTOR_HIDDEN, "relu6"))
    return Network(
        layers=layers,
        lstm=init_lstm(rng, ACTOR_HIDDEN, LSTM_UNITS),
        heads=[
            init_dense(rng, LSTM_UNITS, 1, "tanh"),
            init_dense(rng, LSTM_UNITS, 1, "softplus"),
        ],
    )


def build_critic(rng):
    layers = [init_dense(rng, OBS_SIZE, CRITIC_HIDDEN, "relu6")]
    for _ in range(CRITIC_LAYERS - 1):
        layers.append(init_dense(rng, CRITIC_HIDDEN, CRITIC_HIDDEN, "relu6"))
    return Network(layers=layers, heads=[init_dense(rng, CRITIC_HIDDEN, 1, "linear")])


def policy_forward(actor, norm_obs, state, var_floor=1e-4):
    """Untaped policy evaluation: returns (mu, variance, new state)."""
    (mu, var), state = actor.forward(norm_obs, state)
    return float(mu[0]), max(float(var[0]), var_floor), state


def value_forward(critic, norm_obs):
    (v,), _ = critic.forward(norm_obs)
    return float(v[0])


def sample_action(mu, var, rng):
    """Draw the raw action u ~ N(mu, var)."""
    return rng.normal(mu, math.sqrt(var))


def log_prob(mu, var, u):
    return -0.5 * (math.log(2.0 * math.pi * var) + (u - mu) ** 2 / var)


def entropy(var):
    return 0.5 * (math.log(2.0 * math.pi * var) + 1.0)


def taped_policy_forward(actor, tape, norm_obs, h_in, c_in, var_floor):
    """Tape-recorded policy step.

    h_in/c_in may be plain arrays (gradient stops, i.e. window boundary)
    or tape nodes from the previous step of the same window.
    """
    x = norm_obs
    for lay in actor.layers:
        x = tape.dense(lay, x)
    h_node, c_node = tape.lstm(actor.lstm, x, h_in, c_in)
    mu_node = tape.dense(actor.heads[0], h_node)
    var_node = tape.clamp_min(tape.dense(actor.heads[1], h_node), var_floor)
    return mu_node, var_node, h_node, c_node


def critic_batch_forward(critic, x_batch):
    """Evaluate the critic on a (m, 4) batch; returns (values, caches)."""
    a = x_batch
    caches = []
    for lay in critic.layers + critic.heads:
        z = a @ lay.weights.T + lay.biases
        if lay.activation == "relu6":
            y = np.clip(z, 0.0, 6.0)
        elif lay.activation == "linear":
            y = z
        else:
            raise ValueError(f"unsupported critic activation {lay.activation}")
        caches.append((a, z))
        a = y
    return a[:, 0], caches


def critic_batch_gradients(critic, caches, dv):
    """Backward through the batched critic; grads aligned with parameters()."""
    layers = critic.layers + critic.heads
    da = dv[:, None]
    grads = [None] * (2 * len(layers))
    for i in range(len(layers) - 1, -1, -1):
        lay = layers[i]
        a, z = caches[i]
        if lay.activation == "relu6":
            dz = np.where((z > 0.0) & (z < 6.0), da, 0.0)
        else:
            dz = da
        grads[2 * i] = dz.T @ a
        grads[2 * i + 1] = dz.sum(axis=0)
        da = dz @ lay.weights
    return grads


@dataclass
class Rollout:
    """One n-step window plus the actor tape needed to update from it."""

    observations: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    values: list = field(default_factory=list)
    log_probs: list = field(default_factory=list)
    entropies: list = field(default_factory=list)
    terminal: bool = False
    bootstrap_value: float = 0.0

    actor_tape: GradientTape = None
    lp_nodes: list = field(default_factory=list)
    ent_nodes: list = field(default_factory=list)

    def __len__(self):
        return len(self.rewards)


def n_step_advantages(rollout, gamma):
    """Bootstrapped n-step advantage for every step of the window.

    A_t = sum_k gamma^k r_{t+k} + gamma^m V_boot - V(s_t), where the sum
    runs to the window end and V_boot is zero for terminal windows.
    """
    m = len(rollout)
    if m == 0:
        raise ValueError("empty rollout")
    boot = 0.0 if rollout.terminal else rollout.bootstrap_value
    adv = np.empty(m)
    ret = boot
    for t in range(m - 1, -1, -1):
        ret = rollout.rewards[t] + gamma * ret
        adv[t] = ret - rollout.values[t]
    return adv


def critic_update(critic, rollout, advantages, hyper, opt):
    """One RMSProp step on the mean squared advantage (n-step target fixed)."""
    m = len(rollout)
    x = np.asarray(rollout.observations)
    targets = advantages + np.asarray(rollout.values)
    v, caches = critic_batch_forward(critic, x)
    err = v - targets
    grads = critic_batch_gradients(critic, caches, 2.0 * err / m)
    opt.step(grads, hyper.lr_critic)
    return float(np.mean(err * err))


def actor_update(actor, rollout, advantages, hyper, opt):
    """One RMSProp step on mean(-log pi * A - beta * H), advantages fixed."""
    m = len(rollout)
    tape = rollout.actor_tape
    nodes = list(rollout.lp_nodes) + list(rollout.ent_nodes)
    coeffs = [-float(a) / m for a in advantages] + [-hyper.beta / m] * m
    loss = tape.weighted_sum(nodes, coeffs)
    params = actor.parameters()
    grads = tape.gradients(loss, params)
    opt.step(grads, hyper.lr_actor)
    return loss.item()


@dataclass
class EpisodeRecord:
    episode: int
    cof: float
    min_th: float
    total_reward: float
    steps: int
    collision: bool
    first_collision_step: int | None


@dataclass
class RunLog:
    episodes: list = field(default_factory=list)

    @property
    def collisions(self):
        return sum(1 for e in self.episodes if e.collision)

    @property
    def episodes_to_first_collision(self):
        for e in self.episodes:
            if e.collision:
                return e.episode + 1  # 1-based count of episodes run
        return None


TRACE_FIELDS = (
    "step",
    "t_s",
    "v_lead",
    "v_follow",
    "a_lead_cmd",
    "a_lead_applied",
    "a_follow_cmd",
    "a_follow_applied",
    "gap_m",
    "th_s",
    "reward",
)


def train_run(
    env_config,
    follower,
    hyper,
    seed,
    episodes,
    trace_sink=None,
    checkpoint_every=None,
    checkpoint_sink=None,
):
    """Train one adversary against one follower; deterministic given seed.

    trace_sink(episode_index, rows) is called with the full per-step trace
    of every collision episode. checkpoint_sink(episode_index, actor) is
    called every checkpoint_every episodes. Returns (actor, RunLog).
    """
    rng = np.random.default_rng(seed)
    actor = build_actor(rng)
    critic = build_critic(rng)
    opt_actor = RmsPropState(
        actor.parameters(), hyper.rms_alpha, hyper.rms_eps, hyper.rms_momentum
    )
    opt_critic = RmsPropState(
        critic.parameters(), hyper.rms_alpha, hyper.rms_eps, hyper.rms_momentum
    )
    env = AdversaryEnv(env_config, follower, rng)
    log = RunLog()
    dt = env_config.sim.dt
    n = hyper.rollout

    for ep in range(episodes):
        obs = env.reset()
        cof = env.world.cof
        h_carry = np.zeros(LSTM_UNITS)
        c_carry = np.zeros(LSTM_UNITS)
        done = False
        total_reward = 0.0
        min_th = obs.t_h
        steps = 0
        collided = False
        trace = [] if trace_sink is not None else None

        while not done:
            rollout = Rollout(actor_tape=GradientTape())
            h_node = h_carry  # constants at the window boundary
            c_node = c_carry
            for _ in range(n):
                norm = normalize_obs(obs)
                mu_node, var_node, h_node, c_node = taped_policy_forward(
                    actor, rollout.actor_tape, norm, h_node, c_node, hyper.var_floor
                )
                mu = mu_node.value[0]
                var = var_node.value[0]
                u = rng.normal(mu, math.sqrt(var))
                lp_node = rollout.actor_tape.gaussian_log_prob(mu_node, var_node, u)
                ent_node = rollout.actor_tape.gaussian_entropy(var_node)

                outcome = env.step(u)
                steps += 1
                total_reward += outcome.reward
                th = outcome.info["t_h"]
                if th < min_th:
                    min_th = th
                if trace is not None:
                    info = outcome.info
                    trace.append(
                        (
                            steps,
                            steps * dt,
                            info["v_lead"],
                            info["v_follow"],
                            info["a_lead_cmd"],
                            info["a_lead_applied"],
                            info["a_follow_cmd"],
                            info["a_follow_applied"],
                            info["gap"],
                            th,
                            outcome.reward,
                        )
                    )

                rollout.observations.append(norm)
                rollout.actions.append(u)
                rollout.rewards.append(outcome.reward)
                rollout.log_probs.append(lp_node.value[0])
                rollout.entropies.append(ent_node.value[0])
                rollout.lp_nodes.append(lp_node)
                rollout.ent_nodes.append(ent_node)

                obs = outcome.observation
                if outcome.done:
                    done = True
                    collided = outcome.done_reason == "collision"
                    rollout.terminal = True
                    break

            values, _ = critic_batch_forward(critic, np.asarray(rollout.observations))
            rollout.values = values.tolist()
            if not rollout.terminal:
                rollout.bootstrap_value = value_forward(critic, normalize_obs(obs))
            adv = n_step_advantages(rollout, hyper.gamma)
            critic_update(critic, rollout, adv, hyper, opt_critic)
            actor_update(actor, rollout, adv, hyper, opt_actor)
            if not isinstance(h_node, np.ndarray):
                h_carry = h_node.value
                c_carry = c_node.value

        log.episodes.append(
            EpisodeRecord(
                episode=ep,
                cof=cof,
                min_th=min_th,
                total_reward=total_reward,
                steps=steps,
                collision=collided,
                first_collision_step=steps if collided else None,
            )
        )
        if trace is not None and collided:
            trace_sink(ep, trace)
        if checkpoint_every and checkpoint_sink and (ep + 1) % checkpoint_every == 0:
            checkpoint_sink(ep, actor)

    return actor, log
