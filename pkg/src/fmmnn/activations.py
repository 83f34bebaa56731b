"""Activation functions with first and second derivatives.

At kinks (ReLU at 0, SinTU at its threshold) the right-hand derivative is
used, so every activation is total on finite inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import NumericError, RangeError

_TAGS = {
    "relu": _kernels.TAG_RELU,
    "gelu": _kernels.TAG_GELU,
    "elu": _kernels.TAG_ELU,
    "sigmoid": _kernels.TAG_SIGMOID,
    "tanh": _kernels.TAG_TANH,
    "sine": _kernels.TAG_SINE,
    "cosine": _kernels.TAG_COSINE,
    "sintu": _kernels.TAG_SINTU,
}


@dataclass(frozen=True)
class ActivationKind:
    tag: str
    s: float = 0.0  # sintu threshold; ignored for other tags

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise RangeError(f"unknown activation tag: {self.tag!r}")
        if self.tag == "sintu" and not np.isfinite(self.s):
            raise RangeError("sintu threshold must be finite")

    @property
    def name(self) -> str:
        """Config-file spelling, e.g. 'sine' or 'sintu:-3.14159'."""
        return f"sintu:{self.s!r}" if self.tag == "sintu" else self.tag


def parse_activation(name: str) -> ActivationKind:
    """Parse a config-file activation name ('sintu:<s>' carries s in radians)."""
    name = name.strip().lower()
    if name.startswith("sintu:"):
        try:
            s = float(name[len("sintu:"):])
        except ValueError:
            raise RangeError(f"bad sintu threshold in {name!r}") from None
        return ActivationKind("sintu", s)
    if name == "sintu":
        return ActivationKind("sintu", 0.0)
    return ActivationKind(name)


def act_eval(kind: ActivationKind, x: float) -> tuple[float, float, float]:
    """Value and first/second derivative at a scalar point."""
    if not np.isfinite(x):
        raise NumericError(f"non-finite activation input: {x}")
    v, d1, d2 = _kernels.act_triple(_TAGS[kind.tag], kind.s, np.array([x]))
    return float(v[0]), float(d1[0]), float(d2[0])


def act_arrays(kind: ActivationKind, x: np.ndarray):
    """Vectorized (value, d1, d2) over an array of pre-activations."""
    return _kernels.act_triple(_TAGS[kind.tag], kind.s, x)


def act_value(kind: ActivationKind, x: np.ndarray) -> np.ndarray:
    return act_arrays(kind, x)[0]
