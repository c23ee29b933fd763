"""Compare the compiled and pure-Python kernel backends.

Times the three hot kernels (dense forward/backward, LSTM step
forward/backward, RMSProp update) and a full training step, and verifies
that both backends agree to float64 round-off. Run with::

    python3 benchmarks/backends.py
"""

import time

import numpy as np

from redlead.nnet.backend import load_backend


def bench(fn, *args, repeat=2000):
    fn(*args)  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def kernel_cases(rng):
    w = rng.normal(size=(50, 50))
    b = rng.normal(size=50)
    x = rng.normal(size=50)
    gy = rng.normal(size=50)
    wx = rng.normal(size=(64, 50))
    wh = rng.normal(size=(64, 16))
    lb = rng.normal(size=64)
    h = rng.normal(size=16)
    c = rng.normal(size=16)
    gh = rng.normal(size=16)
    gc = rng.normal(size=16)
    return w, b, x, gy, wx, wh, lb, h, c, gh, gc


def run_backend(name):
    k = load_backend(name)
    rng = np.random.default_rng(0)
    w, b, x, gy, wx, wh, lb, h, c, gh, gc = kernel_cases(rng)

    y, z = k.dense_forward(w, b, x, 1)
    h2, c2, cache = k.lstm_forward(wx, wh, lb, x, h, c)

    times = {
        "dense_forward": bench(k.dense_forward, w, b, x, 1),
        "dense_backward": bench(k.dense_backward, w, x, z, y, 1, gy),
        "lstm_forward": bench(k.lstm_forward, wx, wh, lb, x, h, c),
        "lstm_backward": bench(k.lstm_backward, wx, wh, x, h, c, cache, gh, gc),
    }
    param = rng.normal(size=(50, 50))
    grad = rng.normal(size=(50, 50))
    acc = np.abs(rng.normal(size=(50, 50)))
    times["rmsprop_update"] = bench(
        k.rmsprop_update, param, grad, acc, 1e-4, 0.9, 1e-10
    )
    outputs = {
        "dense_y": y,
        "lstm_h": h2,
        "lstm_c": c2,
    }
    return times, outputs


_TRAIN_SNIPPET = """
import time
from redlead.a2c import Hyperparams, train_run
from redlead.env import EnvConfig
from redlead.nnet.backend import BACKEND_NAME
from redlead.targets import NaiveTracker

t0 = time.perf_counter()
_, log = train_run(EnvConfig(episode_steps=1500), NaiveTracker(), Hyperparams(),
                   seed=1, episodes=2)
steps = sum(e.steps for e in log.episodes)
print(BACKEND_NAME, steps / (time.perf_counter() - t0))
"""


def training_step_rate(backend_name):
    """Full-loop rate, measured in a subprocess so the backend choice
    (fixed at import time) actually applies."""
    import os
    import subprocess
    import sys

    env = dict(os.environ, REDLEAD_KERNELS=backend_name)
    out = subprocess.run(
        [sys.executable, "-c", _TRAIN_SNIPPET],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    used, rate = out.stdout.split()
    assert used == backend_name, f"requested {backend_name}, got {used}"
    return float(rate)


def main():
    results = {}
    for name in ("python", "cython"):
        try:
            results[name] = run_backend(name)
        except ImportError as exc:
            print(f"{name}: unavailable ({exc})")
    if len(results) == 2:
        print(f"{'kernel':<16}{'python':>12}{'cython':>12}{'speedup':>9}")
        for key in results["python"][0]:
            tp = results["python"][0][key]
            tc = results["cython"][0][key]
            print(f"{key:<16}{tp * 1e6:>10.2f}us{tc * 1e6:>10.2f}us{tp / tc:>8.1f}x")
        for key, a in results["python"][1].items():
            bdiff = np.max(np.abs(a - results["cython"][1][key]))
            print(f"agreement {key}: max abs diff {bdiff:.3e}")
            assert bdiff < 1e-12
    for name in results:
        rate = training_step_rate(name)
        print(f"full training step, {name}: {rate:,.0f} env steps/s")


if __name__ == "__main__":
    main()
