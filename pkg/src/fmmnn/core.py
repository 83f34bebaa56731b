"""Shared numerics: deterministic PRNG, dense matmul, 1-D quadrature.

Everything downstream (model init, dataset sampling, landscape integrals)
goes through this module so that a run is fully reproducible from its seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ShapeError",
    "RangeError",
    "NumericError",
    "PrngState",
    "QuadratureRule",
    "matmul",
    "prng_uniform",
    "integrate",
]


class ShapeError(ValueError):
    """Operand dimensions are inconsistent."""


class RangeError(ValueError):
    """An argument lies outside its allowed range."""


class NumericError(ArithmeticError):
    """A computation produced or consumed a non-finite value."""


# splitmix64 constants (Steele, Lea & Flood; also used to seed xoshiro).
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = 0xFFFFFFFFFFFFFFFF


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer; input/output are uint64 arrays or scalars."""
    z = np.uint64(z) if np.isscalar(z) else z.astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@dataclass
class PrngState:
    """Counter-based splitmix64 stream.

    The i-th output is ``mix(seed + (i+1)*gamma)``, so a block of draws can be
    produced vectorized while remaining identical to one-at-a-time draws.
    Single-owner: never share one state across concurrent tasks; derive child
    streams with :meth:`split` instead.
    """

    seed: int
    counter: int = 0
    algorithm: str = field(default="splitmix64", repr=False)

    def next_u64(self, n: int | None = None):
        """Advance the stream by ``n`` (or 1) and return raw uint64 words."""
        k = 1 if n is None else int(n)
        with np.errstate(over="ignore"):
            idx = np.arange(self.counter + 1, self.counter + k + 1, dtype=np.uint64)
            words = _mix64(np.uint64(self.seed & _U64_MASK) + idx * _GAMMA)
        self.counter += k
        return words[0] if n is None else words

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return float(prng_uniform(self, lo, hi))

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        """Vectorized draws on [lo, hi); same stream as repeated uniform()."""
        if lo > hi:
            raise RangeError(f"empty interval: lo={lo} > hi={hi}")
        u = (self.next_u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return lo + u * (hi - lo)

    def split(self, stream_index: int) -> "PrngState":
        """Child state for parallel work: seed XOR stream index."""
        return PrngState(seed=(self.seed ^ stream_index) & _U64_MASK)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n) keyed by this stream."""
        return np.argsort(self.next_u64(n), kind="stable")


def prng_uniform(state: PrngState, lo: float, hi: float) -> float:
    """One draw on [lo, hi), advancing ``state``."""
    if lo > hi:
        raise RangeError(f"empty interval: lo={lo} > hi={hi}")
    u = float(state.next_u64() >> np.uint64(11)) * 2.0**-53
    return lo + u * (hi - lo)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense product with an explicit shape check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


@dataclass(frozen=True)
class QuadratureRule:
    kind: str = "trapezoid"  # or "gauss-legendre"
    nodes: int = 4096

    def __post_init__(self):
        if self.kind not in ("trapezoid", "gauss-legendre"):
            raise RangeError(f"unknown quadrature kind: {self.kind!r}")
        if self.nodes < 2:
            raise RangeError("quadrature needs at least 2 nodes")

    def points_weights(self, a: float, b: float):
        if self.kind == "trapezoid":
            x = np.linspace(a, b, self.nodes)
            h = (b - a) / (self.nodes - 1)
            w = np.full(self.nodes, h)
            w[0] = w[-1] = h / 2.0
            return x, w
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        mid, half = (a + b) / 2.0, (b - a) / 2.0
        return mid + half * t, half * w


def integrate(f, a: float, b: float, rule: QuadratureRule | None = None) -> float:
    """Approximate the integral of ``f`` on [a, b].

    ``f`` may be scalar or vectorized over a 1-D array of sample points.
    """
    if a > b:
        raise RangeError(f"inverted interval: a={a} > b={b}")
    rule = rule or QuadratureRule()
    x, w = rule.points_weights(a, b)
    try:
        y = np.asarray(f(x), dtype=np.float64)
        if y.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):  # scalar-only integrand
        y = np.array([f(float(xi)) for xi in x], dtype=np.float64)
    if not np.all(np.isfinite(y)):
        raise NumericError("integrand produced a non-finite sample")
    return float(y @ w)
