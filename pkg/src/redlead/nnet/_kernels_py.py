"""Pure-numpy kernel backend.

Reference implementation of the hot math: dense layer forward/backward,
LSTM cell forward/backward, and the RMSProp parameter update. The compiled
backend in ``_kernels_cy.pyx`` mirrors these signatures exactly; which one
is used is decided once at import in ``backend.py``.
"""

import numpy as np

BACKEND_NAME = "python"

ACT_LINEAR = 0
ACT_RELU6 = 1
ACT_TANH = 2
ACT_SOFTPLUS = 3


def _activate(z, act):
    if act == ACT_LINEAR:
        return z.copy()
    if act == ACT_RELU6:
        return np.clip(z, 0.0, 6.0)
    if act == ACT_TANH:
        return np.tanh(z)
    if act == ACT_SOFTPLUS:
        # log(1 + e^z) without overflow for large z
        return np.where(z > 30.0, z, np.log1p(np.exp(np.minimum(z, 30.0))))
    raise ValueError(f"unknown activation code {act}")


def dense_forward(w, b, x, act):
    """Return (y, z) where z = W x + b is kept for the backward pass."""
    z = w @ x + b
    return _activate(z, act), z


def dense_backward(w, x, z, y, act, gy):
    """Gradients of a dense layer given upstream dL/dy.

    Returns (gW, gb, gx).
    """
    if act == ACT_LINEAR:
        dz = gy.copy()
    elif act == ACT_RELU6:
        dz = np.where((z > 0.0) & (z < 6.0), gy, 0.0)
    elif act == ACT_TANH:
        dz = gy * (1.0 - y * y)
    elif act == ACT_SOFTPLUS:
        dz = gy / (1.0 + np.exp(-z))
    else:
        raise ValueError(f"unknown activation code {act}")
    gw = np.outer(dz, x)
    gb = dz
    gx = w.T @ dz
    return gw, gb, gx


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def lstm_forward(wx, wh, b, x, h, c):
    """One LSTM step.

    Gate blocks are stacked row-wise in order [input, forget, candidate,
    output]. Returns (h2, c2, cache) with cache = (i, f, g, o, tanh_c2).
    """
    nh = h.shape[0]
    s = wx @ x + wh @ h + b
    i = _sigmoid(s[:nh])
    f = _sigmoid(s[nh : 2 * nh])
    g = np.tanh(s[2 * nh : 3 * nh])
    o = _sigmoid(s[3 * nh :])
    c2 = f * c + i * g
    tc = np.tanh(c2)
    h2 = o * tc
    return h2, c2, (i, f, g, o, tc)


def lstm_backward(wx, wh, x, h, c, cache, gh2, gc2):
    """Backward through one LSTM step.

    gh2/gc2 are upstream gradients w.r.t. the new hidden and cell state.
    Returns (gWx, gWh, gb, gx, gh, gc).
    """
    i, f, g, o, tc = cache
    go = gh2 * tc
    gctot = gc2 + gh2 * o * (1.0 - tc * tc)
    gi = gctot * g
    gf = gctot * c
    gg = gctot * i
    gc = gctot * f
    ds = np.concatenate(
        [
            gi * i * (1.0 - i),
            gf * f * (1.0 - f),
            gg * (1.0 - g * g),
            go * o * (1.0 - o),
        ]
    )
    gwx = np.outer(ds, x)
    gwh = np.outer(ds, h)
    gb = ds
    gx = wx.T @ ds
    gh = wh.T @ ds
    return gwx, gwh, gb, gx, gh, gc


def dense_backward_acc(w, x, z, y, act, gy, gw, gb):
    """Like dense_backward but accumulates gW/gb into caller buffers; returns gx."""
    if act == ACT_LINEAR:
        dz = gy
    elif act == ACT_RELU6:
        dz = np.where((z > 0.0) & (z < 6.0), gy, 0.0)
    elif act == ACT_TANH:
        dz = gy * (1.0 - y * y)
    elif act == ACT_SOFTPLUS:
        dz = gy / (1.0 + np.exp(-z))
    else:
        raise ValueError(f"unknown activation code {act}")
    gw += np.outer(dz, x)
    gb += dz
    return w.T @ dz


def lstm_backward_acc(wx, wh, x, h, c, cache, gh2, gc2, gwx, gwh, gb):
    """Accumulating variant of lstm_backward; returns (gx, gh, gc)."""
    i, f, g, o, tc = cache
    gctot = gc2 + gh2 * o * (1.0 - tc * tc)
    ds = np.concatenate(
        [
            gctot * g * i * (1.0 - i),
            gctot * c * f * (1.0 - f),
            gctot * i * (1.0 - g * g),
            gh2 * tc * o * (1.0 - o),
        ]
    )
    gwx += np.outer(ds, x)
    gwh += np.outer(ds, h)
    gb += ds
    return wx.T @ ds, wh.T @ ds, gctot * f


def rmsprop_update(param, grad, acc, lr, alpha, eps):
    """In-place RMSProp step: acc <- a*acc + (1-a)*g^2; p -= lr*g/(sqrt(acc)+eps)."""
    acc *= alpha
    acc += (1.0 - alpha) * grad * grad
    param -= lr * grad / (np.sqrt(acc) + eps)
