"""Reverse-mode gradient tape.

The tape records the handful of operation kinds the training losses are
built from (dense layer, LSTM step, Gaussian log-density, Gaussian entropy,
floor clamp, squared error, weighted sum) and replays them backward to get
parameter gradients of a scalar loss. Inputs passed as plain arrays are
constants; gradients flow only through ``Node`` handles, which is also how
backpropagation through time is truncated: feed the previous window's
recurrent state in as a plain array and the gradient stops there.
"""

import math

import numpy as np

from ..errors import UsageError
from .backend import kernels as K

_DENSE = 0
_LSTM = 1
_LOGPROB = 2
_ENTROPY = 3
_CLAMPMIN = 4
_SQERR = 5
_WSUM = 6


class Node:
    __slots__ = ("idx", "value")

    def __init__(self, idx, value):
        self.idx = idx
        self.value = value

    def item(self):
        return float(self.value[0])


class GradientTape:
    def __init__(self):
        self._entries = []
        self._next = 0

    def _node(self, value):
        n = Node(self._next, value)
        self._next += 1
        return n

    @staticmethod
    def _split(x):
        """Return (value, idx) for a Node or a constant array."""
        if isinstance(x, Node):
            return x.value, x.idx
        return np.asarray(x, dtype=np.float64), -1

    def dense(self, layer, x):
        xv, xi = self._split(x)
        y, z = K.dense_forward(layer.weights, layer.biases, xv, layer._act)
        out = self._node(y)
        self._entries.append((_DENSE, layer, xv, z, y, xi, out.idx))
        return out

    def lstm(self, cell, x, h, c):
        xv, xi = self._split(x)
        hv, hi = self._split(h)
        cv, ci = self._split(c)
        h2, c2, cache = K.lstm_forward(cell.wx, cell.wh, cell.bias, xv, hv, cv)
        hout = self._node(h2)
        cout = self._node(c2)
        self._entries.append(
            (_LSTM, cell, xv, hv, cv, cache, xi, hi, ci, hout.idx, cout.idx)
        )
        return hout, cout

    def gaussian_log_prob(self, mu, var, u):
        mv, mi = self._split(mu)
        vv, vi = self._split(var)
        m, v = mv[0], vv[0]
        val = -0.5 * (math.log(2.0 * math.pi * v) + (u - m) ** 2 / v)
        out = self._node(np.array([val]))
        self._entries.append((_LOGPROB, m, v, u, mi, vi, out.idx))
        return out

    def gaussian_entropy(self, var):
        vv, vi = self._split(var)
        v = vv[0]
        out = self._node(np.array([0.5 * (math.log(2.0 * math.pi * v) + 1.0)]))
        self._entries.append((_ENTROPY, v, vi, out.idx))
        return out

    def clamp_min(self, x, floor):
        xv, xi = self._split(x)
        out = self._node(np.maximum(xv, floor))
        self._entries.append((_CLAMPMIN, xv, floor, xi, out.idx))
        return out

    def squared_error(self, x, target):
        xv, xi = self._split(x)
        d = xv[0] - target
        out = self._node(np.array([d * d]))
        self._entries.append((_SQERR, d, xi, out.idx))
        return out

    def weighted_sum(self, nodes, coeffs):
        """Scalar sum(c_i * node_i); the way losses are assembled."""
        if len(nodes) != len(coeffs):
            raise UsageError("weighted_sum needs one coefficient per node")
        total = 0.0
        terms = []
        for n, c in zip(nodes, coeffs):
            total += c * n.value[0]
            terms.append((n.idx, c))
        out = self._node(np.array([total]))
        self._entries.append((_WSUM, terms, out.idx))
        return out

    def gradients(self, loss, params):
        """d(loss)/d(p) for every (name, array) pair in params.

        Returns a list of gradient arrays aligned with ``params``; parameters
        the loss does not depend on get zeros.
        """
        if not isinstance(loss, Node) or not (0 <= loss.idx < self._next):
            raise UsageError("loss must be a node recorded on this tape")
        if loss.value.shape != (1,):
            raise UsageError("loss node must be scalar")

        ngrad = {loss.idx: np.array([1.0])}
        pgrad = {}

        def buf(arr):
            key = id(arr)
            b = pgrad.get(key)
            if b is None:
                b = np.zeros_like(arr)
                pgrad[key] = b
            return b

        def acc_node(idx, g):
            if idx < 0:
                return
            if idx in ngrad:
                ngrad[idx] += g
            else:
                ngrad[idx] = g

        for entry in reversed(self._entries):
            kind = entry[0]
            if kind == _DENSE:
                _, layer, xv, z, y, xi, oi = entry
                gy = ngrad.pop(oi, None)
                if gy is None:
                    continue
                gx = K.dense_backward_acc(
                    layer.weights, xv, z, y, layer._act, gy,
                    buf(layer.weights), buf(layer.biases),
                )
                acc_node(xi, gx)
            elif kind == _LSTM:
                _, cell, xv, hv, cv, cache, xi, hi, ci, hoi, coi = entry
                gh2 = ngrad.pop(hoi, None)
                gc2 = ngrad.pop(coi, None)
                if gh2 is None and gc2 is None:
                    continue
                nh = cell.hidden_size
                if gh2 is None:
                    gh2 = np.zeros(nh)
                if gc2 is None:
                    gc2 = np.zeros(nh)
                gx, gh, gc = K.lstm_backward_acc(
                    cell.wx, cell.wh, xv, hv, cv, cache, gh2, gc2,
                    buf(cell.wx), buf(cell.wh), buf(cell.bias),
                )
                acc_node(xi, gx)
                acc_node(hi, gh)
                acc_node(ci, gc)
            elif kind == _LOGPROB:
                _, m, v, u, mi, vi, oi = entry
                g = ngrad.pop(oi, None)
                if g is None:
                    continue
                gs = g[0]
                acc_node(mi, np.array([gs * (u - m) / v]))
                acc_node(vi, np.array([gs * 0.5 * ((u - m) ** 2 - v) / (v * v)]))
            elif kind == _ENTROPY:
                _, v, vi, oi = entry
                g = ngrad.pop(oi, None)
                if g is None:
                    continue
                acc_node(vi, np.array([g[0] * 0.5 / v]))
            elif kind == _CLAMPMIN:
                _, xv, floor, xi, oi = entry
                g = ngrad.pop(oi, None)
                if g is None:
                    continue
                acc_node(xi, np.where(xv > floor, g, 0.0))
            elif kind == _SQERR:
                _, d, xi, oi = entry
                g = ngrad.pop(oi, None)
                if g is None:
                    continue
                acc_node(xi, np.array([2.0 * d * g[0]]))
            elif kind == _WSUM:
                _, terms, oi = entry
                g = ngrad.pop(oi, None)
                if g is None:
                    continue
                gs = g[0]
                for idx, c in terms:
                    acc_node(idx, np.array([c * gs]))

        out = []
        for _name, arr in params:
            g = pgrad.get(id(arr))
            out.append(np.zeros_like(arr) if g is None else g)
        return out


def backward(tape, loss, params):
    """Functional alias for ``tape.gradients``."""
    return tape.gradients(loss, params)
