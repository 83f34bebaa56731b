"""Benchmark target functions and dataset samplers.

Names addressable from configs: ``s31.f1``, ``s31.f2``, ``s31.f3`` (the
smooth-bump and sawtooth-squared families), ``s32.f1``/``s32.f2``/``s32.f3``
(oscillatory 1-D/2-D/3-D targets with fixed coefficient matrices), ``bump.g``
(the compactly supported bump basis), and ``runge100`` (1/(1+100x^2)). All are
defined on [-1, 1]^dim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PrngState, RangeError

__all__ = [
    "TargetFn",
    "Dataset",
    "get_target",
    "target_names",
    "target_eval",
    "analytic_deriv",
    "sample_points",
    "sample",
    "make_dataset",
]


@dataclass(frozen=True)
class TargetFn:
    name: str
    dim: int
    fn: callable  # (n, dim) array -> (n,) array
    deriv1: callable | None = None  # 1-D smooth targets only
    deriv2: callable | None = None

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None] if self.dim == 1 else X[None, :]
        return self.fn(X)


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray  # (n, dim)
    Y: np.ndarray  # (n, 1)


# ---------------------------------------------------------------------------
# smooth bump family (highly oscillatory C-infinity target)
# ---------------------------------------------------------------------------

def _g0(x: np.ndarray) -> np.ndarray:
    """exp(-1/x^2) for x > 0, else 0; underflow for tiny x flushes to 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0.0
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / (x[pos] * x[pos]))
    return out


def _g0_d1(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0.0
    xp = x[pos]
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / (xp * xp)) * (2.0 / xp**3)
    return out


def _g0_d2(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0.0
    xp = x[pos]
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / (xp * xp)) * (4.0 / xp**6 - 6.0 / xp**4)
    return out


_G0_1_SQ = float(np.exp(-1.0)) ** 2  # g0(1)^2


def _bump(x: np.ndarray) -> np.ndarray:
    """g(x) = g0(x+1) g0(1-x) / g0(1)^2; supported on (-1, 1), g(0) = 1."""
    return _g0(x + 1.0) * _g0(1.0 - x) / _G0_1_SQ


def _bump_d1(x: np.ndarray) -> np.ndarray:
    return (_g0_d1(x + 1.0) * _g0(1.0 - x)
            - _g0(x + 1.0) * _g0_d1(1.0 - x)) / _G0_1_SQ


def _bump_d2(x: np.ndarray) -> np.ndarray:
    return (_g0_d2(x + 1.0) * _g0(1.0 - x)
            - 2.0 * _g0_d1(x + 1.0) * _g0_d1(1.0 - x)
            + _g0(x + 1.0) * _g0_d2(1.0 - x)) / _G0_1_SQ


_F1_N = 36
_F1_I = np.arange(-_F1_N, _F1_N + 1)
# (-1)^(i mod 3) with the remainder taken in {0, 1, 2}
_F1_W = ((-1.0) ** (_F1_I % 3)) * (np.abs(_F1_I) + _F1_N) / _F1_N
_F1_SCALE = 2 * _F1_N + 1  # 73
_F1_CENTERS = _F1_I / (_F1_N + 1)  # i/37


def _f1_sum(x: np.ndarray, order: int) -> np.ndarray:
    g = (_bump, _bump_d1, _bump_d2)[order]
    u = _F1_SCALE * (x[:, None] - _F1_CENTERS[None, :])
    return (_F1_SCALE ** order) * (g(u) @ _F1_W)


def _s31_f1(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return _f1_sum(x, 0) / (1.0 + 2.0 * x * x)


def _s31_f1_d1(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    q = 1.0 + 2.0 * x * x
    p, p1 = 1.0 / q, -4.0 * x / q**2
    return p1 * _f1_sum(x, 0) + p * _f1_sum(x, 1)


def _s31_f1_d2(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    q = 1.0 + 2.0 * x * x
    p, p1, p2 = 1.0 / q, -4.0 * x / q**2, (24.0 * x * x - 4.0) / q**3
    return p2 * _f1_sum(x, 0) + 2.0 * p1 * _f1_sum(x, 1) + p * _f1_sum(x, 2)


# ---------------------------------------------------------------------------
# sawtooth-squared family (continuous, non-smooth)
# ---------------------------------------------------------------------------

def _saw(t: np.ndarray) -> np.ndarray:
    """t - 2*floor((t+1)/2): the 2-periodic sawtooth on [-1, 1)."""
    return t - 2.0 * np.floor((t + 1.0) / 2.0)


def _s31_f2(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return (1.0 + 6.0 * x**8) / (1.0 + 8.0 * x**6) * _saw(120.0 * x * x) ** 2


def _s31_f3(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return (1.0 + 6.0 * x**8) / (1.0 + 8.0 * x**6) * _saw(32.0 * x) ** 2


# ---------------------------------------------------------------------------
# oscillatory 1-D/2-D/3-D targets with fixed coefficient matrices
# ---------------------------------------------------------------------------

def _s32_f1(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return (0.6 * np.sin(200.0 * np.pi * x)
            + 0.8 * np.cos(160.0 * np.pi * x * x)
            + (1.0 + 8.0 * x**8) / (1.0 + 10.0 * x**4)
            * np.abs(_saw(180.0 * x)))


_PI = np.pi
_A2 = np.array([[0.3, 0.2], [0.2, 0.3]])
_B2 = np.array([12.0, 8.0]) * _PI
_C2 = np.array([[4.0, 18.0], [16.0, 10.0]]) * _PI
_D2 = np.array([[14.0, 12.0], [18.0, 10.0]]) * _PI

_A3 = np.array([[0.3, 0.1, 0.4], [0.2, 0.3, 0.1], [0.2, 0.1, 0.3]])
_B3 = np.array([1.0, 4.0, 3.0]) * _PI
_C3 = np.array([[2.0, 1.0, 3.0], [2.0, 3.0, 2.0], [3.0, 1.0, 1.0]]) * _PI
_D3 = np.array([[2.0, 3.0, 1.0], [1.0, 3.0, 2.0], [1.0, 2.0, 3.0]]) * _PI


def _osc_sum(X: np.ndarray, A, B, C, D) -> np.ndarray:
    d = A.shape[0]
    out = np.zeros(X.shape[0])
    for i in range(d):
        xi = X[:, i]
        for j in range(d):
            xj = X[:, j]
            out += (A[i, j] * np.sin(B[i] * xi + C[i, j] * xi * xj)
                    * np.abs(np.cos(B[j] * xj + D[i, j] * xi * xi)))
    return out


def _s32_f2(X: np.ndarray) -> np.ndarray:
    return _osc_sum(X, _A2, _B2, _C2, _D2)


def _s32_f3(X: np.ndarray) -> np.ndarray:
    return _osc_sum(X, _A3, _B3, _C3, _D3)


def _runge100(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return 1.0 / (1.0 + 100.0 * x * x)


def _runge100_d1(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return -200.0 * x / (1.0 + 100.0 * x * x) ** 2


def _runge100_d2(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    q = 1.0 + 100.0 * x * x
    return (80000.0 * x * x - 200.0 * q) / q**3


_TARGETS = {
    "s31.f1": TargetFn("s31.f1", 1, _s31_f1, _s31_f1_d1, _s31_f1_d2),
    "s31.f2": TargetFn("s31.f2", 1, _s31_f2),
    "s31.f3": TargetFn("s31.f3", 1, _s31_f3),
    "s32.f1": TargetFn("s32.f1", 1, _s32_f1),
    "s32.f2": TargetFn("s32.f2", 2, _s32_f2),
    "s32.f3": TargetFn("s32.f3", 3, _s32_f3),
    "bump.g": TargetFn("bump.g", 1, lambda X: _bump(X[:, 0]),
                       lambda X: _bump_d1(X[:, 0]), lambda X: _bump_d2(X[:, 0])),
    "runge100": TargetFn("runge100", 1, _runge100, _runge100_d1, _runge100_d2),
}


def target_names() -> list[str]:
    return sorted(_TARGETS)


def get_target(name: str) -> TargetFn:
    try:
        return _TARGETS[name]
    except KeyError:
        raise LookupError(f"unknown target: {name!r}") from None


def target_eval(name: str, x) -> float:
    """Point evaluation; x is a scalar (dim 1) or a length-dim vector."""
    t = get_target(name)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return float(t(x[None, :] if x.size == t.dim else x)[0])


def analytic_deriv(name: str, x: float, order: int) -> float:
    """Closed-form first/second derivative of a smooth 1-D target."""
    t = get_target(name)
    d = {1: t.deriv1, 2: t.deriv2}.get(order)
    if d is None:
        raise RangeError(f"no analytic order-{order} derivative for {name!r}")
    return float(d(np.array([[float(x)]]))[0])


def sample_points(dim: int, n_or_grid: int, mode: str, seed: int = 0) -> np.ndarray:
    """Sample [-1,1]^dim: an endpoint-inclusive lattice or uniform draws.

    Grid mode treats ``n_or_grid`` as points per axis; random mode as the
    total count.
    """
    if n_or_grid < 1:
        raise RangeError("sample size must be >= 1")
    if mode == "grid":
        axis = np.linspace(-1.0, 1.0, n_or_grid)
        mesh = np.meshgrid(*([axis] * dim), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    if mode == "uniform-random":
        rng = PrngState(seed=seed)
        return rng.uniforms(n_or_grid * dim, -1.0, 1.0).reshape(n_or_grid, dim)
    raise RangeError(f"unknown sampling mode: {mode!r}")


def sample(name: str, n_or_grid: int, mode: str, seed: int = 0) -> Dataset:
    """Dataset (X, Y) for a named target; Y is always computed in f64."""
    t = get_target(name)
    X = sample_points(t.dim, n_or_grid, mode, seed)
    return Dataset(X=X, Y=t(X)[:, None])


make_dataset = sample
