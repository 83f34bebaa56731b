"""Multi-component networks (MMNN / ResMMNN) and plain FCNNs.

An MMNN layer is h_i(x) = A_i * sigma(W_i x + b_i) + c_i, where W_i and b_i
are frozen after random initialization and only A_i, c_i are trained. The
ResMMNN variant wraps interior layers with identity skips. FCNNs train all
parameters and are kept behind the same interface for comparison runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationKind, act_arrays, parse_activation
from .core import PrngState, RangeError, ShapeError

__all__ = [
    "ModelSpec",
    "MmnnLayer",
    "Model",
    "Jet2",
    "count_params",
    "build_model",
    "scaling_factor",
    "forward",
    "forward_batch",
    "forward_jet",
    "jet_batch",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # mmnn | resmmnn | fcnn
    width: int
    rank: int | None = None
    depth: int = 1
    input_dim: int = 1
    output_dim: int = 1
    activation: ActivationKind = field(default_factory=lambda: ActivationKind("sine"))
    residual_layers: tuple[int, ...] | None = None  # resmmnn; default {2..L-1}

    def __post_init__(self):
        if self.kind not in ("mmnn", "resmmnn", "fcnn"):
            raise RangeError(f"unknown model kind: {self.kind!r}")
        if self.width < 1 or self.depth < 1:
            raise RangeError("width and depth must be >= 1")
        if self.kind in ("mmnn", "resmmnn"):
            if self.rank is None or self.rank < 1 or self.rank > self.width:
                raise RangeError("mmnn rank must satisfy 1 <= R <= N")
        for i in self.residuals():
            if not 2 <= i <= self.depth - 1:
                raise RangeError(f"residual layer {i} outside {{2..L-1}}")

    def residuals(self) -> tuple[int, ...]:
        if self.kind != "resmmnn":
            return ()
        if self.residual_layers is not None:
            return self.residual_layers
        return tuple(range(2, self.depth))

    def component_dims(self) -> list[int]:
        """Per-layer output dims d_0..d_L (mmnn kinds only)."""
        return [self.input_dim] + [self.rank] * (self.depth - 1) + [self.output_dim]

    def fcnn_dims(self) -> list[int]:
        """Affine-map dims for an FCNN with L hidden layers of width N."""
        return [self.input_dim] + [self.width] * self.depth + [self.output_dim]


@dataclass
class MmnnLayer:
    W: np.ndarray  # (n_i, d_{i-1}), frozen
    b: np.ndarray  # (n_i,), frozen
    A: np.ndarray  # (d_i, n_i), trainable
    c: np.ndarray  # (d_i,), trainable
    residual: bool = False


@dataclass
class Model:
    spec: ModelSpec
    layers: list  # MmnnLayer list, or (W, b) affine pairs for fcnn
    init_mode: str = "default"
    seed: int = 0

    def trainable_arrays(self) -> list[np.ndarray]:
        if self.spec.kind == "fcnn":
            return [t for W, b in self.layers for t in (W, b)]
        return [t for lay in self.layers for t in (lay.A, lay.c)]

    def frozen_arrays(self) -> list[np.ndarray]:
        if self.spec.kind == "fcnn":
            return []
        return [t for lay in self.layers for t in (lay.W, lay.b)]


@dataclass(frozen=True)
class Jet2:
    """Value with first and second derivative w.r.t. a scalar input."""

    v: float
    d1: float = 0.0
    d2: float = 0.0


def count_params(spec: ModelSpec) -> tuple[int, int]:
    """(trainable, total) parameter counts."""
    if spec.kind == "fcnn":
        dims = spec.fcnn_dims()
        total = sum(dims[i + 1] * dims[i] + dims[i + 1] for i in range(len(dims) - 1))
        return total, total
    N = spec.width
    d = spec.component_dims()
    trainable = sum(d[i] * N + d[i] for i in range(1, spec.depth + 1))
    frozen = sum(N * d[i - 1] + N for i in range(1, spec.depth + 1))
    return trainable, trainable + frozen


def scaling_factor(input_dim: int, first_width: int) -> float:
    """First-layer scale sqrt(d0) * (n1/2)^(1/d0) for the scaled init."""
    return float(np.sqrt(input_dim) * (first_width / 2.0) ** (1.0 / input_dim))


def _draw(rng: PrngState, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniforms(int(np.prod(shape)), -bound, bound).reshape(shape)


def build_model(spec: ModelSpec, seed: int, init_mode: str = "default") -> Model:
    """Draw all parameters uniformly on [-1/sqrt(fan_in), +1/sqrt(fan_in)].

    With init_mode='scaled', the first-layer W, b are then multiplied by
    sqrt(d0) * (N/2)^(1/d0); all other tensors are identical to the default
    build under the same seed.
    """
    if init_mode not in ("default", "scaled"):
        raise RangeError(f"unknown init_mode: {init_mode!r}")
    rng = PrngState(seed=seed)
    residuals = spec.residuals()
    if spec.kind == "fcnn":
        dims = spec.fcnn_dims()
        layers = []
        for i in range(len(dims) - 1):
            fan = dims[i]
            W = _draw(rng, (dims[i + 1], dims[i]), fan)
            b = _draw(rng, (dims[i + 1],), fan)
            layers.append((W, b))
    else:
        N = spec.width
        d = spec.component_dims()
        layers = []
        for i in range(1, spec.depth + 1):
            W = _draw(rng, (N, d[i - 1]), d[i - 1])
            b = _draw(rng, (N,), d[i - 1])
            A = _draw(rng, (d[i], N), N)
            c = _draw(rng, (d[i],), N)
            res = i in residuals
            if res and d[i - 1] != d[i]:
                raise ShapeError(
                    f"residual layer {i} needs matching dims, got {d[i-1]} -> {d[i]}"
                )
            layers.append(MmnnLayer(W, b, A, c, residual=res))
    if init_mode == "scaled":
        factor = scaling_factor(spec.input_dim, spec.width)
        if spec.kind == "fcnn":
            W, b = layers[0]
            layers[0] = (W * factor, b * factor)
        else:
            layers[0].W = layers[0].W * factor
            layers[0].b = layers[0].b * factor
    return Model(spec=spec, layers=layers, init_mode=init_mode, seed=seed)


def forward_batch(model: Model, X: np.ndarray) -> np.ndarray:
    """Evaluate on a batch; X is (n, d0), result (n, output_dim)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.spec.input_dim:
        raise ShapeError(f"expected input dim {model.spec.input_dim}, got {X.shape[1]}")
    act = model.spec.activation
    h = X
    if model.spec.kind == "fcnn":
        for W, b in model.layers[:-1]:
            h = act_arrays(act, h @ W.T + b)[0]
        W, b = model.layers[-1]
        return h @ W.T + b
    for lay in model.layers:
        s = act_arrays(act, h @ lay.W.T + lay.b)[0]
        y = s @ lay.A.T + lay.c
        h = h + y if lay.residual else y
    return h


def forward(model: Model, x) -> np.ndarray:
    """Single-point evaluation; x is a length-d0 vector (or scalar for d0=1)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or x.size != model.spec.input_dim:
        raise ShapeError(f"expected a length-{model.spec.input_dim} vector")
    return forward_batch(model, x[None, :])[0]


def jet_batch(model: Model, xs: np.ndarray):
    """Propagate (value, d1, d2) w.r.t. the scalar input for many points.

    Only defined for input_dim == 1. Returns three (n, output_dim) arrays.
    """
    if model.spec.input_dim != 1:
        raise ShapeError("second-order jets require input_dim == 1")
    xs = np.asarray(xs, dtype=np.float64).reshape(-1, 1)
    act = model.spec.activation
    V, D1, D2 = xs, np.ones_like(xs), np.zeros_like(xs)

    def affine(W, b, V, D1, D2):
        return V @ W.T + b, D1 @ W.T, D2 @ W.T

    def activate(V, D1, D2):
        v, s1, s2 = act_arrays(act, V)
        return v, s1 * D1, s2 * D1 * D1 + s1 * D2

    if model.spec.kind == "fcnn":
        for W, b in model.layers[:-1]:
            V, D1, D2 = activate(*affine(W, b, V, D1, D2))
        return affine(*model.layers[-1], V, D1, D2)
    for lay in model.layers:
        U, U1, U2 = activate(*affine(lay.W, lay.b, V, D1, D2))
        Y, Y1, Y2 = U @ lay.A.T + lay.c, U1 @ lay.A.T, U2 @ lay.A.T
        if lay.residual:
            Y, Y1, Y2 = Y + V, Y1 + D1, Y2 + D2
        V, D1, D2 = Y, Y1, Y2
    return V, D1, D2


def forward_jet(model: Model, x: Jet2) -> Jet2:
    """Second-order jet through the whole network at one scalar point."""
    V, D1, D2 = jet_batch(model, np.array([x.v]))
    # compose with the incoming jet (chain rule for x as a function of t)
    v = float(V[0, 0])
    d1 = float(D1[0, 0]) * x.d1
    d2 = float(D2[0, 0]) * x.d1 * x.d1 + float(D1[0, 0]) * x.d2
    return Jet2(v, d1, d2)


# ---------------------------------------------------------------------------
# serialization: JSON round-trips bit-exactly (shortest-form decimal floats)
# ---------------------------------------------------------------------------

def _flat(a: np.ndarray) -> list[float]:
    return [float(x) for x in np.asarray(a, dtype=np.float64).ravel()]


def model_to_dict(model: Model) -> dict:
    spec = model.spec
    d = {
        "spec": {
            "kind": spec.kind,
            "width": spec.width,
            "rank": spec.rank,
            "depth": spec.depth,
            "input_dim": spec.input_dim,
            "output_dim": spec.output_dim,
            "activation": spec.activation.name,
            "residual_layers": list(spec.residual_layers)
            if spec.residual_layers is not None
            else None,
        },
        "init_mode": model.init_mode,
        "seed": model.seed,
    }
    if spec.kind == "fcnn":
        d["layers"] = [{"W": _flat(W), "b": _flat(b)} for W, b in model.layers]
    else:
        d["layers"] = [
            {"W": _flat(l.W), "b": _flat(l.b), "A": _flat(l.A), "c": _flat(l.c)}
            for l in model.layers
        ]
    return d


def model_from_dict(d: dict) -> Model:
    sd = d["spec"]
    spec = ModelSpec(
        kind=sd["kind"],
        width=sd["width"],
        rank=sd["rank"],
        depth=sd["depth"],
        input_dim=sd["input_dim"],
        output_dim=sd["output_dim"],
        activation=parse_activation(sd["activation"]),
        residual_layers=tuple(sd["residual_layers"])
        if sd.get("residual_layers") is not None
        else None,
    )
    residuals = spec.residuals()
    if spec.kind == "fcnn":
        dims = spec.fcnn_dims()
        layers = [
            (
                np.array(ld["W"]).reshape(dims[i + 1], dims[i]),
                np.array(ld["b"]).reshape(dims[i + 1]),
            )
            for i, ld in enumerate(d["layers"])
        ]
    else:
        N = spec.width
        cd = spec.component_dims()
        layers = [
            MmnnLayer(
                W=np.array(ld["W"]).reshape(N, cd[i]),
                b=np.array(ld["b"]).reshape(N),
                A=np.array(ld["A"]).reshape(cd[i + 1], N),
                c=np.array(ld["c"]).reshape(cd[i + 1]),
                residual=(i + 1) in residuals,
            )
            for i, ld in enumerate(d["layers"])
        ]
    return Model(spec=spec, layers=layers, init_mode=d["init_mode"], seed=d["seed"])


def save_model(model: Model, path) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> Model:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
