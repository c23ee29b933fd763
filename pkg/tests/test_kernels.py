"""Kernel-level tests: activations, dense/LSTM math, RMSProp, backend parity."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from redlead.nnet import load_backend
from redlead.nnet.backend import BACKEND_NAME


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
        names.append("cython")
    except ImportError:
        pass
    return names


BACKENDS = available_backends()


@pytest.fixture(params=BACKENDS)
def K(request):
    return load_backend(request.param)


def test_compiled_backend_is_default_when_built():
    if "cython" in BACKENDS:
        assert BACKEND_NAME == "cython"


class TestDense:
    def test_identity_linear(self, K):
        y, _ = K.dense_forward(np.eye(2), np.zeros(2), np.array([1.0, 2.0]), K.ACT_LINEAR)
        assert np.array_equal(y, [1.0, 2.0])

    def test_relu6_clamps(self, K):
        w = np.eye(3)
        y, _ = K.dense_forward(w, np.zeros(3), np.array([-1.0, 3.0, 7.0]), K.ACT_RELU6)
        assert np.array_equal(y, [0.0, 3.0, 6.0])

    def test_softplus_at_zero(self, K):
        y, _ = K.dense_forward(np.zeros((1, 1)), np.zeros(1), np.array([0.0]), K.ACT_SOFTPLUS)
        assert y[0] == pytest.approx(math.log(2.0), abs=1e-15)

    @given(st.lists(st.floats(-50, 50), min_size=1, max_size=8))
    def test_activation_ranges(self, xs):
        K = load_backend(BACKENDS[0])
        x = np.array(xs)
        w = np.eye(len(xs))
        b = np.zeros(len(xs))
        r6, _ = K.dense_forward(w, b, x, K.ACT_RELU6)
        th, _ = K.dense_forward(w, b, x, K.ACT_TANH)
        sp, _ = K.dense_forward(w, b, x, K.ACT_SOFTPLUS)
        assert np.all((r6 >= 0.0) & (r6 <= 6.0))
        # mathematically open (-1,1); float64 saturates to the endpoints
        assert np.all((th >= -1.0) & (th <= 1.0))
        assert np.all(sp > 0.0)


class TestLstm:
    def test_zero_parameters_give_zero_output(self, K):
        H = 4
        h2, c2, _ = K.lstm_forward(
            np.zeros((4 * H, 3)), np.zeros((4 * H, H)), np.zeros(4 * H),
            np.array([5.0, -2.0, 1.0]), np.zeros(H), np.zeros(H),
        )
        assert np.array_equal(h2, np.zeros(H))
        assert np.array_equal(c2, np.zeros(H))

    def test_saturated_forget_gate_preserves_cell(self, K):
        # forget bias -> +inf limit with zero weights: c2 = sigmoid(inf)*c = c
        H = 2
        b = np.zeros(4 * H)
        b[H : 2 * H] = 500.0  # saturates the sigmoid to 1.0 exactly in float64
        c = np.array([0.7, -1.3])
        _, c2, _ = K.lstm_forward(
            np.zeros((4 * H, 2)), np.zeros((4 * H, H)), b,
            np.array([1.0, 1.0]), np.zeros(H), c,
        )
        # input gate contributes sigmoid(0)*tanh(0) = 0, so the cell carries over
        assert np.allclose(c2, c, atol=0.0)

    def test_matches_hand_evaluated_gates(self, K):
        # independent oracle: the gate equations evaluated with plain scalar
        # arithmetic for one fixed 2-unit cell and a 1-d input
        H = 2
        wx = np.array([[0.5], [-0.3], [0.2], [0.7], [-0.4], [0.1], [0.6], [-0.2]])
        wh = np.array(
            [
                [0.1, -0.1],
                [0.2, 0.3],
                [-0.2, 0.4],
                [0.05, -0.3],
                [0.3, 0.2],
                [-0.1, 0.1],
                [0.25, -0.15],
                [0.4, 0.1],
            ]
        )
        b = np.array([0.01, -0.02, 1.0, 1.0, 0.05, -0.05, 0.0, 0.1])
        x = np.array([0.9])
        h = np.array([0.2, -0.1])
        c = np.array([0.3, 0.5])

        def sig(v):
            return 1.0 / (1.0 + math.exp(-v))

        expect_h, expect_c = [], []
        for k in range(H):
            si = wx[k, 0] * x[0] + wh[k, 0] * h[0] + wh[k, 1] * h[1] + b[k]
            sf = wx[H + k, 0] * x[0] + wh[H + k, 0] * h[0] + wh[H + k, 1] * h[1] + b[H + k]
            sg = (
                wx[2 * H + k, 0] * x[0]
                + wh[2 * H + k, 0] * h[0]
                + wh[2 * H + k, 1] * h[1]
                + b[2 * H + k]
            )
            so = (
                wx[3 * H + k, 0] * x[0]
                + wh[3 * H + k, 0] * h[0]
                + wh[3 * H + k, 1] * h[1]
                + b[3 * H + k]
            )
            ck = sig(sf) * c[k] + sig(si) * math.tanh(sg)
            expect_c.append(ck)
            expect_h.append(sig(so) * math.tanh(ck))

        h2, c2, _ = K.lstm_forward(wx, wh, b, x, h, c)
        assert np.allclose(h2, expect_h, atol=1e-12)
        assert np.allclose(c2, expect_c, atol=1e-12)


class TestRmsProp:
    def test_zero_gradient_is_fixed_point(self, K):
        p = np.array([1.0, -2.0])
        acc = np.array([0.5, 0.25])
        K.rmsprop_update(p, np.zeros(2), acc, 0.01, 0.9, 1e-10)
        assert np.array_equal(p, [1.0, -2.0])
        assert np.allclose(acc, [0.45, 0.225])  # accumulator still decays

    def test_single_step_hand_computed(self, K):
        # acc = 0.9*0 + 0.1*1 = 0.1; theta = -0.01*1/(sqrt(0.1)+1e-10)
        p = np.zeros(1)
        acc = np.zeros(1)
        K.rmsprop_update(p, np.ones(1), acc, 0.01, 0.9, 1e-10)
        assert acc[0] == pytest.approx(0.1, abs=1e-15)
        assert p[0] == pytest.approx(-0.01 / (math.sqrt(0.1) + 1e-10), abs=1e-15)
        assert p[0] == pytest.approx(-0.0316228, abs=1e-7)

    def test_repeated_identical_gradient_shrinks_step(self, K):
        p = np.zeros(1)
        acc = np.zeros(1)
        K.rmsprop_update(p, np.ones(1), acc, 0.01, 0.9, 1e-10)
        first = -p[0]
        before = p[0]
        K.rmsprop_update(p, np.ones(1), acc, 0.01, 0.9, 1e-10)
        second = before - p[0]
        assert 0.0 < second < first


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
class TestBackendParity:
    """Both kernel implementations must agree to float round-off."""

    def test_dense_and_lstm_agree(self):
        py, cy = load_backend("python"), load_backend("cython")
        rng = np.random.default_rng(42)
        for act in range(4):
            w = rng.normal(size=(6, 5))
            b = rng.normal(size=6)
            x = rng.normal(size=5)
            gy = rng.normal(size=6)
            y1, z1 = py.dense_forward(w, b, x, act)
            y2, z2 = cy.dense_forward(w, b, x, act)
            assert np.allclose(y1, y2, atol=1e-14)
            for a, bb in zip(
                py.dense_backward(w, x, z1, y1, act, gy),
                cy.dense_backward(w, x, z2, y2, act, gy),
            ):
                assert np.allclose(a, bb, atol=1e-13)
        H = 4
        wx = rng.normal(size=(4 * H, 5))
        wh = rng.normal(size=(4 * H, H))
        b = rng.normal(size=4 * H)
        x, h, c = rng.normal(size=5), rng.normal(size=H), rng.normal(size=H)
        gh, gc = rng.normal(size=H), rng.normal(size=H)
        h1, c1, k1 = py.lstm_forward(wx, wh, b, x, h, c)
        h2, c2, k2 = cy.lstm_forward(wx, wh, b, x, h, c)
        assert np.allclose(h1, h2, atol=1e-14)
        assert np.allclose(c1, c2, atol=1e-14)
        for a, bb in zip(
            py.lstm_backward(wx, wh, x, h, c, k1, gh, gc),
            cy.lstm_backward(wx, wh, x, h, c, k2, gh, gc),
        ):
            assert np.allclose(a, bb, atol=1e-13)

    def test_accumulating_backward_matches_plain(self):
        for name in BACKENDS:
            K = load_backend(name)
            rng = np.random.default_rng(7)
            w = rng.normal(size=(3, 4))
            b = rng.normal(size=3)
            x = rng.normal(size=4)
            gy = rng.normal(size=3)
            y, z = K.dense_forward(w, b, x, K.ACT_TANH)
            gw, gb, gx = K.dense_backward(w, x, z, y, K.ACT_TANH, gy)
            gw2, gb2 = np.zeros_like(w), np.zeros_like(b)
            gx2 = K.dense_backward_acc(w, x, z, y, K.ACT_TANH, gy, gw2, gb2)
            assert np.allclose(gw, gw2, atol=1e-15)
            assert np.allclose(gb, gb2, atol=1e-15)
            assert np.allclose(gx, gx2, atol=1e-15)
