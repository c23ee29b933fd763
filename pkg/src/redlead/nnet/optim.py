"""RMSProp optimizer state and update."""

import numpy as np

from ..errors import ConfigurationError
from .backend import kernels as K


class RmsPropState:
    """Per-parameter squared-gradient accumulator.

    Only zero momentum is supported; the update is
    acc <- alpha*acc + (1-alpha)*g^2, p <- p - lr*g/(sqrt(acc)+eps).
    """

    def __init__(self, params, alpha=0.9, eps=1e-10, momentum=0.0):
        if not 0.0 < alpha < 1.0:
            raise ConfigurationError(f"RMSProp decay alpha must be in (0,1), got {alpha}")
        if momentum != 0.0:
            raise ConfigurationError("only momentum = 0.0 is supported")
        self.alpha = alpha
        self.eps = eps
        self.momentum = momentum
        self.acc = [np.zeros_like(arr) for _name, arr in params]
        self._params = params

    def step(self, grads, learning_rate):
        """Apply one update in place; grads aligned with the params list."""
        if len(grads) != len(self.acc):
            raise ConfigurationError("gradient list does not match parameter list")
        for (_, p), g, a in zip(self._params, grads, self.acc):
            if g.shape != p.shape:
                raise ConfigurationError(
                    f"gradient shape {g.shape} does not match parameter shape {p.shape}"
                )
            K.rmsprop_update(p, g, a, learning_rate, self.alpha, self.eps)


def rmsprop_step(params, grads, opt, learning_rate):
    """Functional form: one RMSProp step over (name, array) params."""
    assert opt._params is params or [id(a) for _n, a in opt._params] == [
        id(a) for _n, a in params
    ], "optimizer state was built for different parameters"
    opt.step(grads, learning_rate)
