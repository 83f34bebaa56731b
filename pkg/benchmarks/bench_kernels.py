"""Benchmark the numba hot kernels against the pure-numpy fallbacks.

Run twice to compare backends:

    python3 benchmarks/bench_kernels.py
    FMMNN_PURE_NUMPY=1 python3 benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from fmmnn import _kernels
from fmmnn.activations import ActivationKind, act_arrays
from fmmnn.models import ModelSpec, build_model
from fmmnn.training import loss_and_grad


def timeit(fn, *args, repeat=5, warmup=2):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    backend = "numpy" if _kernels.PURE_NUMPY or not _kernels.USE_NUMBA \
        else "numba"
    print(f"backend: {backend}")
    rng = np.random.default_rng(0)

    z = rng.standard_normal((2048, 434))
    for name in ("sine", "relu", "gelu", "sintu:-6.283"):
        from fmmnn.activations import parse_activation

        kind = parse_activation(name)
        t = timeit(act_arrays, kind, z)
        print(f"act_triple[{name:>12}]  (2048, 434): {t * 1e3:8.3f} ms")

    y = rng.uniform(-1, 1, 16)
    u = float(np.max(np.abs(y)))
    ws = np.linspace(1.0 / 64.0, 1.0 / 16.0, 64)
    vs = np.linspace(1.0, 1e4, 200_000)
    t = timeit(_kernels.match_scan, y, u, ws, vs, 0.05)
    print(f"match_scan  64 w x 200k v, K=16: {t * 1e3:8.3f} ms")

    spec = ModelSpec(kind="mmnn", width=434, rank=16, depth=6,
                     activation=ActivationKind("sine"))
    model = build_model(spec, seed=0)
    X = rng.uniform(-1, 1, (1000, 1))
    Y = rng.uniform(-1, 1, (1000, 1))
    t = timeit(loss_and_grad, model, (X, Y), repeat=3, warmup=1)
    print(f"loss_and_grad MMNN(434,16,6), n=1000: {t * 1e3:8.3f} ms")


if __name__ == "__main__":
    main()
