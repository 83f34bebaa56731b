"""Loss landscapes: analytic two-parameter cost surfaces and model slices.

The analytic cases are squared-difference integrals over [-pi, pi]:
  L1(w1, w2)   = int (sin(w1 x + w2) - sin(w1* x + w2*))^2 dx
  L2(w1, w2)   = int (sin(w1 x) + sin(w2 x) - sin(w1* x) - sin(w2* x))^2 dx
  L3(w1, w2)   = int (sin(w2 sin(w1 x)) - sin(w2* sin(w1* x)))^2 dx
scan_pair samples the full-dataset MSE of a model while sweeping two of its
scalar parameters over a rectangular grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QuadratureRule, RangeError, integrate
from .models import Model, forward_batch

__all__ = [
    "ParamCoord",
    "LandscapeGrid",
    "analytic_landscape",
    "resolve_coord",
    "scan_pair",
]


@dataclass(frozen=True)
class ParamCoord:
    """Addresses one scalar parameter: (layer index, tensor name, row, col).

    Tensor names: W, b, A, c for MMNN kinds; W, b for FCNN. Vector tensors
    (b, c) use col = 0.
    """

    layer: int
    tensor: str
    row: int
    col: int = 0


@dataclass
class LandscapeGrid:
    coords: tuple  # (ParamCoord, ParamCoord)
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray  # shape (len(axis1), len(axis2))
    base_loss: float


def analytic_landscape(case: str, w1: float, w2: float, wstar) -> float:
    """Value of the named cost surface at (w1, w2) with optimum wstar."""
    w1s, w2s = float(wstar[0]), float(wstar[1])
    rule = QuadratureRule()
    if case == "L1":
        def f(x):
            return (np.sin(w1 * x + w2) - np.sin(w1s * x + w2s)) ** 2
    elif case == "L2":
        def f(x):
            return (np.sin(w1 * x) + np.sin(w2 * x)
                    - np.sin(w1s * x) - np.sin(w2s * x)) ** 2
    elif case == "L3":
        def f(x):
            return (np.sin(w2 * np.sin(w1 * x))
                    - np.sin(w2s * np.sin(w1s * x))) ** 2
    else:
        raise RangeError(f"unknown landscape case: {case!r}")
    return integrate(f, -np.pi, np.pi, rule)


def resolve_coord(model: Model, coord: ParamCoord) -> np.ndarray:
    """The tensor holding the addressed scalar, with bounds checked."""
    if not 0 <= coord.layer < len(model.layers):
        raise RangeError(f"layer {coord.layer} out of range")
    lay = model.layers[coord.layer]
    if model.spec.kind == "fcnn":
        tensors = {"W": lay[0], "b": lay[1]}
    else:
        tensors = {"W": lay.W, "b": lay.b, "A": lay.A, "c": lay.c}
    if coord.tensor not in tensors:
        raise RangeError(f"unknown tensor {coord.tensor!r} for this model")
    t = tensors[coord.tensor]
    idx = (coord.row, coord.col) if t.ndim == 2 else (coord.row,)
    if coord.row >= t.shape[0] or (t.ndim == 2 and coord.col >= t.shape[1]) \
            or (t.ndim == 1 and coord.col != 0):
        raise RangeError(f"index ({coord.row},{coord.col}) out of range "
                         f"for tensor of shape {t.shape}")
    return t, idx


def _dataset_mse(model: Model, X: np.ndarray, Y: np.ndarray) -> float:
    resid = forward_batch(model, X) - Y
    return float(np.mean(np.sum(resid * resid, axis=1)))


def scan_pair(model: Model, dataset, p1: ParamCoord, p2: ParamCoord,
              ranges=((-3.0, 3.0), (-3.0, 3.0)),
              resolution: int = 101) -> LandscapeGrid:
    """Full-dataset MSE over a 2-parameter grid; the model is restored on
    exit bit-exactly."""
    if resolution < 1:
        raise RangeError("resolution must be >= 1")
    X = np.atleast_2d(np.asarray(dataset[0], dtype=np.float64))
    Y = np.atleast_2d(np.asarray(dataset[1], dtype=np.float64))
    t1, i1 = resolve_coord(model, p1)
    t2, i2 = resolve_coord(model, p2)
    (a1, b1), (a2, b2) = ranges
    if resolution == 1:
        axis1 = np.array([t1[i1]])
        axis2 = np.array([t2[i2]])
    else:
        axis1 = np.linspace(a1, b1, resolution)
        axis2 = np.linspace(a2, b2, resolution)
    old1, old2 = float(t1[i1]), float(t2[i2])
    values = np.empty((axis1.size, axis2.size))
    try:
        for i, v1 in enumerate(axis1):
            t1[i1] = v1
            for j, v2 in enumerate(axis2):
                t2[i2] = v2
                values[i, j] = _dataset_mse(model, X, Y)
    finally:
        t1[i1], t2[i2] = old1, old2
    return LandscapeGrid(coords=(p1, p2), axis1=axis1, axis2=axis2,
                         values=values, base_loss=_dataset_mse(model, X, Y))
