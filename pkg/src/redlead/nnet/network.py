"""Network building blocks: dense layers, one LSTM cell, and a container.

A ``Network`` is a chain of dense layers, an optional LSTM cell, and one or
more output heads fed from the last body output. That covers every
architecture this project needs (Gaussian-policy actor, scalar critic,
neural follower policies) with a single save/load path.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from .backend import kernels as K

ACTIVATIONS = {
    "linear": K.ACT_LINEAR,
    "relu6": K.ACT_RELU6,
    "tanh": K.ACT_TANH,
    "softplus": K.ACT_SOFTPLUS,
}
_ACT_NAMES = {v: k for k, v in ACTIVATIONS.items()}


def activation_code(name):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ConfigurationError(f"unknown activation {name!r}") from None


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)
    activation: str = "linear"

    def __post_init__(self):
        self.weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.ndim != 1:
            raise ConfigurationError("dense layer expects 2-d weights and 1-d biases")
        if self.weights.shape[0] != self.biases.shape[0]:
            raise ConfigurationError(
                f"dense layer: {self.weights.shape[0]} rows vs {self.biases.shape[0]} biases"
            )
        self._act = activation_code(self.activation)

    @property
    def in_size(self):
        return self.weights.shape[1]

    @property
    def out_size(self):
        return self.weights.shape[0]

    def forward(self, x):
        if x.shape[0] != self.in_size:
            raise ConfigurationError(
                f"dense layer expects input of length {self.in_size}, got {x.shape[0]}"
            )
        y, _ = K.dense_forward(self.weights, self.biases, x, self._act)
        return y


class LstmCell:
    """Single LSTM cell with gate blocks stacked [input, forget, candidate, output]."""

    def __init__(self, wx, wh, bias):
        self.wx = np.ascontiguousarray(wx, dtype=np.float64)  # (4H, in)
        self.wh = np.ascontiguousarray(wh, dtype=np.float64)  # (4H, H)
        self.bias = np.ascontiguousarray(bias, dtype=np.float64)  # (4H,)
        if self.wh.shape[0] != 4 * self.wh.shape[1]:
            raise ConfigurationError("lstm recurrent matrix must be (4H, H)")
        h = self.wh.shape[1]
        if self.wx.shape[0] != 4 * h or self.bias.shape[0] != 4 * h:
            raise ConfigurationError("lstm gate blocks disagree on hidden size")

    @property
    def hidden_size(self):
        return self.wh.shape[1]

    @property
    def in_size(self):
        return self.wx.shape[1]

    def step(self, x, state):
        """Plain (untaped) step: returns (output, new_state)."""
        if x.shape[0] != self.in_size:
            raise ConfigurationError(
                f"lstm expects input of length {self.in_size}, got {x.shape[0]}"
            )
        if state.hidden.shape[0] != self.hidden_size:
            raise ConfigurationError("recurrent state length does not match hidden size")
        h2, c2, _ = K.lstm_forward(self.wx, self.wh, self.bias, x, state.hidden, state.cell)
        return h2, RecurrentState(h2, c2)


@dataclass
class RecurrentState:
    hidden: np.ndarray
    cell: np.ndarray

    @classmethod
    def zeros(cls, hidden_size):
        return cls(np.zeros(hidden_size), np.zeros(hidden_size))


@dataclass
class Network:
    layers: list = field(default_factory=list)  # body DenseLayers
    lstm: LstmCell | None = None
    heads: list = field(default_factory=list)  # output DenseLayers

    def __post_init__(self):
        if not self.heads:
            raise ConfigurationError("network needs at least one output head")
        sizes = [self.in_size]
        for lay in self.layers:
            if lay.in_size != sizes[-1]:
                raise ConfigurationError(
                    f"body layer expects {lay.in_size} inputs, previous produces {sizes[-1]}"
                )
            sizes.append(lay.out_size)
        if self.lstm is not None and self.lstm.in_size != sizes[-1]:
            raise ConfigurationError("lstm input size does not match body output")
        feed = self.lstm.hidden_size if self.lstm is not None else sizes[-1]
        for head in self.heads:
            if head.in_size != feed:
                raise ConfigurationError(
                    f"head expects {head.in_size} inputs, body produces {feed}"
                )

    @property
    def in_size(self):
        if self.layers:
            return self.layers[0].in_size
        if self.lstm is not None:
            return self.lstm.in_size
        return self.heads[0].in_size

    def zero_state(self):
        return RecurrentState.zeros(self.lstm.hidden_size) if self.lstm else None

    def forward(self, x, state=None):
        """Untaped forward pass: returns (head outputs, new recurrent state)."""
        x = np.asarray(x, dtype=np.float64)
        for lay in self.layers:
            x = lay.forward(x)
        if self.lstm is not None:
            if state is None:
                state = self.zero_state()
            x, state = self.lstm.step(x, state)
        return [head.forward(x) for head in self.heads], state

    def parameters(self):
        """Ordered (name, array) pairs; arrays are the live parameter storage."""
        out = []
        for i, lay in enumerate(self.layers):
            out.append((f"layer{i}.W", lay.weights))
            out.append((f"layer{i}.b", lay.biases))
        if self.lstm is not None:
            out.append(("lstm.wx", self.lstm.wx))
            out.append(("lstm.wh", self.lstm.wh))
            out.append(("lstm.b", self.lstm.bias))
        for i, head in enumerate(self.heads):
            out.append((f"head{i}.W", head.weights))
            out.append((f"head{i}.b", head.biases))
        return out

    def arch_descriptor(self):
        parts = [
            f"dense:{lay.in_size}:{lay.out_size}:{lay.activation}" for lay in self.layers
        ]
        if self.lstm is not None:
            parts.append(f"lstm:{self.lstm.in_size}:{self.lstm.hidden_size}")
        parts += [
            f"head:{h.in_size}:{h.out_size}:{h.activation}" for h in self.heads
        ]
        return ",".join(parts)


def _uniform_limit(fan_in, fan_out):
    return np.sqrt(6.0 / (fan_in + fan_out))


def init_dense(rng, in_size, out_size, activation):
    lim = _uniform_limit(in_size, out_size)
    return DenseLayer(
        rng.uniform(-lim, lim, size=(out_size, in_size)),
        np.zeros(out_size),
        activation,
    )


def init_lstm(rng, in_size, hidden_size):
    """LSTM init: uniform gate weights, zero biases, forget-gate bias 1.0."""
    lx = _uniform_limit(in_size, hidden_size)
    lh = _uniform_limit(hidden_size, hidden_size)
    wx = rng.uniform(-lx, lx, size=(4 * hidden_size, in_size))
    wh = rng.uniform(-lh, lh, size=(4 * hidden_size, hidden_size))
    b = np.zeros(4 * hidden_size)
    b[hidden_size : 2 * hidden_size] = 1.0
    return LstmCell(wx, wh, b)
