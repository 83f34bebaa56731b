"""MSE training of the trainable partition with hand-derived backprop + Adam.

For MMNN kinds only the per-layer (A, c) receive gradients; (W, b) stay
frozen. FCNNs train every affine map. The loop is deterministic: the shuffle
permutation for an epoch depends only on (config.seed, epoch).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .activations import act_arrays
from .core import NumericError, PrngState, RangeError, ShapeError
from .models import Model, jet_batch

__all__ = [
    "LrSchedule",
    "TrainConfig",
    "TrainReport",
    "DivergenceError",
    "lr_at",
    "loss_and_grad",
    "AdamState",
    "adam_step",
    "train",
    "evaluate",
    "report_to_csv",
]

_DIVERGENCE_CAP = 1e12


class DivergenceError(NumericError):
    """Training loss became non-finite or exceeded the divergence cap."""

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch, self.batch, self.loss = epoch, batch, loss
        super().__init__(f"divergence at epoch {epoch}, batch {batch}: loss={loss}")


@dataclass(frozen=True)
class LrSchedule:
    base: float = 1e-3
    decay: float = 0.9
    step: int = 10000

    def __post_init__(self):
        if self.base <= 0:
            raise RangeError("lr base must be positive")
        if not 0.0 < self.decay <= 1.0:
            raise RangeError("lr decay must lie in (0, 1]")
        if self.step < 1:
            raise RangeError("lr step must be >= 1")


def lr_at(schedule: LrSchedule, k: int) -> float:
    """Staircase rate base * decay^floor(k/step) at epoch k."""
    if k < 0:
        raise RangeError("epoch index must be >= 0")
    return schedule.base * schedule.decay ** (k // schedule.step)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int
    batch_size: int
    schedule: LrSchedule = field(default_factory=LrSchedule)
    seed: int = 0
    precision: str = "f64"  # f64 | f32
    adam: tuple[float, float, float] = (0.9, 0.999, 1e-8)

    def __post_init__(self):
        if self.epochs < 0:
            raise RangeError("epochs must be >= 0")
        if self.batch_size < 1:
            raise RangeError("batch_size must be >= 1")
        if self.precision not in ("f64", "f32"):
            raise RangeError(f"unknown precision: {self.precision!r}")
        b1, b2, eps = self.adam
        if not (0.0 < b1 < 1.0 and 0.0 < b2 < 1.0 and eps > 0.0):
            raise RangeError("adam betas must lie in (0,1) and eps must be > 0")


@dataclass
class TrainReport:
    records: list  # (epoch, lr, train_mse, test_mse, test_max)
    wall_time: float
    model: Model


def _forward_trace(model: Model, X: np.ndarray):
    """Forward pass keeping the intermediates needed for backprop."""
    act = model.spec.activation
    if model.spec.kind == "fcnn":
        hs, d1s = [X], []
        h = X
        for W, b in model.layers[:-1]:
            v, d1, _ = act_arrays(act, h @ W.T + b)
            hs.append(v)
            d1s.append(d1)
            h = v
        W, b = model.layers[-1]
        return h @ W.T + b, (hs, d1s)
    hs, ss, d1s = [X], [], []
    h = X
    for lay in model.layers:
        v, d1, _ = act_arrays(act, h @ lay.W.T + lay.b)
        y = v @ lay.A.T + lay.c
        out = h + y if lay.residual else y
        ss.append(v)
        d1s.append(d1)
        hs.append(out)
        h = out
    return h, (hs, ss, d1s)


def loss_and_grad(model: Model, batch) -> tuple[float, list[np.ndarray]]:
    """MSE over the batch and exact gradients of the trainable partition.

    The loss is the batch mean of the squared residual norm, so for a scalar
    output it is the usual MSE. Gradients are returned in the order of
    ``model.trainable_arrays()``.
    """
    X, Y = batch
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    n = X.shape[0]
    if n == 0:
        raise RangeError("empty batch")
    if Y.shape[0] != n:
        raise ShapeError(f"batch X has {n} rows but Y has {Y.shape[0]}")

    pred, trace = _forward_trace(model, X)
    if Y.shape[1] != pred.shape[1]:
        raise ShapeError(f"target dim {Y.shape[1]} != output dim {pred.shape[1]}")
    resid = pred - Y
    mse = float(np.mean(np.sum(resid * resid, axis=1)))
    G = (2.0 / n) * resid  # dL/d(pred)

    if model.spec.kind == "fcnn":
        hs, d1s = trace
        grads: list[np.ndarray] = []
        for i in range(len(model.layers) - 1, -1, -1):
            W, _b = model.layers[i]
            grads.append(G.sum(axis=0))  # b
            grads.append(G.T @ hs[i])  # W
            if i > 0:
                G = (G @ W) * d1s[i - 1]
        grads.reverse()
        return mse, grads

    hs, ss, d1s = trace
    grads = []
    for i in range(len(model.layers) - 1, -1, -1):
        lay = model.layers[i]
        grads.append(G.sum(axis=0))  # c
        grads.append(G.T @ ss[i])  # A
        if i > 0:
            Gu = (G @ lay.A) * d1s[i]
            Gh = Gu @ lay.W
            G = Gh + G if lay.residual else Gh
    grads.reverse()
    return mse, grads


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_model(cls, model: Model) -> "AdamState":
        params = model.trainable_arrays()
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray],
              lr: float, betas=(0.9, 0.999, 1e-8)) -> None:
    """One bias-corrected Adam update, in place on ``params``."""
    b1, b2, eps = betas
    state.t += 1
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def _round_precision(arrays: list[np.ndarray], precision: str) -> None:
    if precision == "f32":
        for a in arrays:
            a[...] = a.astype(np.float32, copy=False).astype(np.float64)


def train(model: Model, train_set, test_set, config: TrainConfig) -> TrainReport:
    """Run the training loop, mutating the model's trainable partition.

    Per epoch: reshuffle with a permutation keyed by (config.seed, epoch),
    sweep mini-batches (last one may be short) with one Adam step each at
    lr_at(epoch), then evaluate both sets. Aborts with DivergenceError when a
    batch loss is non-finite or exceeds 1e12.
    """
    Xtr = np.atleast_2d(np.asarray(train_set[0], dtype=np.float64))
    Ytr = np.atleast_2d(np.asarray(train_set[1], dtype=np.float64))
    n = Xtr.shape[0]
    params = model.trainable_arrays()
    _round_precision(params, config.precision)
    opt = AdamState.for_model(model)
    t0 = time.perf_counter()

    def eval_row(epoch: int, lr: float):
        train_mse = _mse_max(model, train_set)[0]
        test_mse, test_max = _mse_max(model, test_set)
        return (epoch, lr, train_mse, test_mse, test_max)

    records = [eval_row(0, lr_at(config.schedule, 0))]
    for epoch in range(config.epochs):
        lr = lr_at(config.schedule, epoch)
        perm = PrngState(seed=config.seed, counter=epoch * n).permutation(n)
        Xs, Ys = Xtr[perm], Ytr[perm]
        for bi, lo in enumerate(range(0, n, config.batch_size)):
            batch = (Xs[lo:lo + config.batch_size], Ys[lo:lo + config.batch_size])
            mse, grads = loss_and_grad(model, batch)
            if not np.isfinite(mse) or mse > _DIVERGENCE_CAP:
                raise DivergenceError(epoch + 1, bi, mse)
            adam_step(opt, params, grads, lr, config.adam)
            _round_precision(params, config.precision)
        records.append(eval_row(epoch + 1, lr))
    return TrainReport(records=records, wall_time=time.perf_counter() - t0,
                       model=model)


def _mse_max(model: Model, dataset) -> tuple[float, float]:
    X = np.atleast_2d(np.asarray(dataset[0], dtype=np.float64))
    Y = np.atleast_2d(np.asarray(dataset[1], dtype=np.float64))
    from .models import forward_batch

    resid = forward_batch(model, X) - Y
    return (float(np.mean(np.sum(resid * resid, axis=1))),
            float(np.max(np.abs(resid))))


def evaluate(model: Model, test_set, deriv_order: int = 0,
             target_derivs=None) -> tuple[float, float, float, float]:
    """(mse, max, rel_mse, rel_max) of the model (or its derivative) vs target.

    deriv_order 1 or 2 differentiates the model w.r.t. its scalar input and
    compares against ``target_derivs``; requires input_dim == 1.
    """
    if deriv_order not in (0, 1, 2):
        raise RangeError("deriv_order must be 0, 1, or 2")
    X = np.atleast_2d(np.asarray(test_set[0], dtype=np.float64))
    if deriv_order == 0:
        target = np.asarray(test_set[1], dtype=np.float64).reshape(X.shape[0], -1)
        from .models import forward_batch

        got = forward_batch(model, X)
    else:
        if model.spec.input_dim != 1:
            raise ShapeError("derivative metrics require input_dim == 1")
        if target_derivs is None:
            raise RangeError("derivative metrics need target derivative samples")
        target = np.asarray(target_derivs, dtype=np.float64).reshape(X.shape[0], -1)
        got = jet_batch(model, X[:, 0])[deriv_order]
    resid = got - target
    mse = float(np.mean(resid * resid))
    mx = float(np.max(np.abs(resid)))
    denom_ms = float(np.mean(target * target))
    denom_mx = float(np.max(np.abs(target)))
    rel_mse = mse / denom_ms if denom_ms > 0 else mse
    rel_max = mx / denom_mx if denom_mx > 0 else mx
    return mse, mx, rel_mse, rel_max


def report_to_csv(report: TrainReport) -> str:
    lines = ["epoch,lr,train_mse,test_mse,test_max"]
    for epoch, lr, tr, te, mx in report.records:
        lines.append(f"{epoch},{lr!r},{tr!r},{te!r},{mx!r}")
    return "\n".join(lines) + "\n"
