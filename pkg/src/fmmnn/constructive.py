"""Executable constructive-approximation builders.

Contains the building blocks of the approximation theorems: exact CPwL-to-ReLU
conversion, floor networks (exact floor on a union of kept intervals), sine
point-matching (u sin(v sin(kw)) through prescribed values), SinTU-to-ReLU
approximants, and the 1-D theorem assembler with its modulus-of-continuity
error bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import match_scan
from .core import PrngState, RangeError

__all__ = [
    "CpwlFunction",
    "ShallowReluNet",
    "FloorNet",
    "SineMatch",
    "SintuReluApprox",
    "TheoremNet1d",
    "ConstructionError",
    "cpwl_to_relu_net",
    "build_floor_net",
    "search_sine_match",
    "sintu_relu_approx",
    "modulus_estimate",
    "build_theorem_net_1d",
]


class ConstructionError(RuntimeError):
    """A budgeted construction failed; carries the best partial artifact."""

    def __init__(self, message: str, artifact=None):
        super().__init__(message)
        self.artifact = artifact


@dataclass(frozen=True)
class CpwlFunction:
    """Continuous piecewise-linear function on R.

    Between consecutive breakpoints the function interpolates ``values``;
    outside the hull it extends with left_slope / right_slope. An affine
    function (no breakpoints) is anchored by ``intercept``: x -> intercept +
    left_slope * x (then left_slope == right_slope is required).
    """

    breakpoints: tuple
    values: tuple
    left_slope: float
    right_slope: float
    intercept: float = 0.0

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        if bp.size != len(self.values):
            raise RangeError("breakpoints and values must pair up")
        if bp.size == 0 and self.left_slope != self.right_slope:
            raise RangeError("an affine CPwL needs equal left/right slopes")
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise RangeError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(bp)) or not np.all(np.isfinite(self.values)):
            raise RangeError("CPwL data must be finite")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if bp.size == 0:
            return self.intercept + self.left_slope * x
        y = np.interp(x, bp, vals)
        y = np.where(x < bp[0], vals[0] + self.left_slope * (x - bp[0]), y)
        y = np.where(x > bp[-1], vals[-1] + self.right_slope * (x - bp[-1]), y)
        return y

    def slopes(self) -> np.ndarray:
        """Per-segment slopes a_0..a_n (leftmost ray to rightmost ray)."""
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        vals = np.asarray(self.values, dtype=np.float64)
        if bp.size == 0:
            return np.array([self.left_slope])
        inner = np.diff(vals) / np.diff(bp) if bp.size > 1 else np.empty(0)
        return np.concatenate(([self.left_slope], inner, [self.right_slope]))


@dataclass(frozen=True)
class ShallowReluNet:
    """x -> sum_j u_j * ReLU(v_j x + w_j) + c."""

    neurons: tuple  # of (u, v, w)
    offset: float

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.full_like(x, self.offset, dtype=np.float64)
        for u, v, w in self.neurons:
            out = out + u * np.maximum(v * x + w, 0.0)
        return out


def cpwl_to_relu_net(h: CpwlFunction) -> ShallowReluNet:
    """Exact one-hidden-layer ReLU realization of a CPwL function.

    With n >= 1 breakpoints the net uses n + 1 neurons. A sloped affine
    function (no breakpoints) needs 2 neurons (a*x = a*ReLU(x) - a*ReLU(-x));
    a constant needs none.
    """
    a = h.slopes()
    bp = np.asarray(h.breakpoints, dtype=np.float64)
    if bp.size == 0:
        if h.left_slope == 0.0:
            return ShallowReluNet(neurons=(), offset=h.intercept)
        return ShallowReluNet(
            neurons=((h.left_slope, 1.0, 0.0), (-h.left_slope, -1.0, 0.0)),
            offset=h.intercept,
        )
    # f(x) = f(x1) - a0*ReLU(x1 - x) + a1*ReLU(x - x1)
    #        + sum_{j>=2} (a_j - a_{j-1}) * ReLU(x - x_j)
    neurons = [(-a[0], -1.0, bp[0]), (a[1], 1.0, -bp[0])]
    for j in range(1, bp.size):
        neurons.append((a[j + 1] - a[j], 1.0, -bp[j]))
    return ShallowReluNet(neurons=tuple(neurons), offset=float(h.values[0]))


# ---------------------------------------------------------------------------
# floor network
# ---------------------------------------------------------------------------

def _step_cpwl(N: int, delta_h: float) -> CpwlFunction:
    """The staircase h with h(k) = h(k + 1 - delta_h) = k for k = 0..N-1.

    Flat plateaus [k, k+1-delta_h] joined by rising ramps; the outer rays
    extend flat, giving 2N-2 breakpoints.
    """
    bp, vals = [], []
    for k in range(N - 1):
        bp.extend([k + 1.0 - delta_h, k + 1.0])
        vals.extend([float(k), float(k + 1)])
    return CpwlFunction(tuple(bp), tuple(vals), left_slope=0.0, right_slope=0.0)


@dataclass(frozen=True)
class FloorNet:
    """ReLU-network floor: exact floor(x) on union_k [k, k+1-delta], k < N^L.

    Realizable at width 4N-1, rank 3, depth L: per level, one channel carries
    z and two (2N-1)-neuron shallow nets compute the digit h_l(z) and the
    remainder z_{l+1}.
    """

    N: int
    L: int
    delta: float
    levels: tuple  # of (digit_net, remainder_net, scale N^{L-l-1})
    width: int
    rank: int = 3

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        z = x.astype(np.float64, copy=True)
        out = np.zeros_like(z)
        for digit_net, remainder_net, scale in self.levels:
            out = out + digit_net(z) * scale
            z = remainder_net(z)
        return out


def build_floor_net(N: int, L: int, delta: float) -> FloorNet:
    """Prop-style exact floor network on union_{k<N^L} [k, k+1-delta]."""
    if N < 1 or L < 1:
        raise RangeError("N and L must be >= 1")
    if not 0.0 < delta < 1.0:
        raise RangeError("delta must lie in (0, 1)")
    if N == 1:
        # N^L = 1: floor is identically 0 on [0, 1-delta]
        zero = ShallowReluNet((), 0.0)
        ident = cpwl_to_relu_net(CpwlFunction((), (), 1.0, 1.0, 0.0))
        return FloorNet(N, L, delta, ((zero, ident, 1.0),) * L, width=3)
    h = _step_cpwl(N, delta / N ** (L - 1))
    levels = []
    for ell in range(L):
        scale = float(N ** (L - ell - 1))
        bp = np.asarray(h.breakpoints) * scale
        digit = CpwlFunction(tuple(bp), h.values, 0.0, 0.0)
        rem_vals = tuple(b - v * scale for b, v in zip(bp, h.values))
        remainder = CpwlFunction(tuple(bp), rem_vals, 1.0, 1.0)
        levels.append((cpwl_to_relu_net(digit), cpwl_to_relu_net(remainder),
                       scale))
    return FloorNet(N, L, delta, tuple(levels), width=4 * N - 1)


# ---------------------------------------------------------------------------
# sine point-matching
# ---------------------------------------------------------------------------

@dataclass
class SineMatch:
    u: float
    v: float
    w: float
    achieved_eps: float
    K: int
    success: bool
    evals: int
    targets: tuple = field(default=(), repr=False)

    def __call__(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=np.float64)
        return self.u * np.sin(self.v * np.sin(k * self.w))


_TWO_PI = 2.0 * np.pi


def _t_segments(lo: float, hi: float, u: float):
    """Segments of t (mod 2pi) with u*sin(t) in [lo, hi]; None if empty."""
    lo, hi = max(lo, -u), min(hi, u)
    if lo > hi:
        return None
    a = float(np.arcsin(np.clip(lo / u, -1.0, 1.0)))
    b = float(np.arcsin(np.clip(hi / u, -1.0, 1.0)))
    top, bot = b >= np.pi / 2 - 1e-12, a <= -np.pi / 2 + 1e-12
    if top and bot:
        return [(0.0, _TWO_PI)]
    if top:
        return [(a, np.pi - a)]
    if bot:
        return [(np.pi - b, _TWO_PI + b)]
    return [(a, b), (np.pi - b, np.pi - a)]


def _seed_intervals(a: float, segs, v_lo: float, v_hi: float):
    """All v-intervals in [v_lo, v_hi] whose phase v*a falls in segs."""
    los, his = [], []
    T = _TWO_PI / a
    for slo, shi in segs:
        m0 = int(np.floor((v_lo * a - shi) / _TWO_PI))
        m1 = int(np.floor((v_hi * a - slo) / _TWO_PI))
        m = np.arange(m0, m1 + 1, dtype=np.float64)
        los.append(np.maximum(slo / a + m * T, v_lo))
        his.append(np.minimum(shi / a + m * T, v_hi))
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    keep = hi > lo
    return lo[keep], hi[keep]


def _intersect_periodic(ivlo, ivhi, a: float, segs):
    """Intersect v-intervals with {v : (v*a mod 2pi) in segs}; counts tests."""
    T = _TWO_PI / a
    outs_lo, outs_hi, tests = [], [], 0
    for slo, shi in segs:
        m_min = np.floor((ivlo * a - shi) / _TWO_PI).astype(np.int64)
        m_max = np.floor((ivhi * a - slo) / _TWO_PI).astype(np.int64)
        counts = np.maximum(m_max - m_min + 1, 0)
        tests += int(counts.sum())
        idx = np.repeat(np.arange(ivlo.size), counts)
        if idx.size == 0:
            continue
        m = (np.repeat(m_min, counts)
             + np.arange(idx.size) - np.repeat(np.cumsum(counts) - counts,
                                               counts)).astype(np.float64)
        nlo = np.maximum(ivlo[idx], slo / a + m * T)
        nhi = np.minimum(ivhi[idx], shi / a + m * T)
        keep = nhi > nlo
        outs_lo.append(nlo[keep])
        outs_hi.append(nhi[keep])
    if not outs_lo:
        return np.empty(0), np.empty(0), tests
    lo, hi = np.concatenate(outs_lo), np.concatenate(outs_hi)
    order = np.argsort(lo)
    return lo[order], hi[order], tests


def _interval_search(y_lo, y_hi, u, ws, v_max, budget):
    """Exact feasibility search: for each w, intersect the periodic sets of
    admissible v per constraint. Each candidate interval inspected counts
    against the budget. Returns (v, w, tests) or (None, None, tests)."""
    K = y_lo.size
    ks = np.arange(1, K + 1, dtype=np.float64)
    tests = 0
    window = 2.0e6  # cap per-(w, window) seed intervals for memory
    v_starts = np.arange(0.0, v_max, window)
    for v0 in v_starts:
        v1 = min(v0 + window, v_max)
        for w in ws:
            if tests >= budget:
                return None, None, tests
            a = np.sin(ks * w)
            segs = [_t_segments(float(y_lo[k]), float(y_hi[k]), u)
                    for k in range(K)]
            if any(s is None for s in segs):
                continue
            frac = [sum(s1 - s0 for s0, s1 in sg) / _TWO_PI for sg in segs]
            order = np.argsort(frac)
            j0 = order[0]
            ivlo, ivhi = _seed_intervals(float(a[j0]), segs[j0], v0, v1)
            tests += ivlo.size
            for j in order[1:]:
                if ivlo.size == 0:
                    break
                ivlo, ivhi, t = _intersect_periodic(ivlo, ivhi, float(a[j]),
                                                    segs[j])
                tests += t
                if tests >= budget:
                    break
            if ivlo.size > 0 and tests <= budget:
                return float(0.5 * (ivlo[0] + ivhi[0])), float(w), tests
    return None, None, tests


def _refine(y, u, eps, best, dv, dw, budget_left, w_lo, w_hi):
    """One 16x16 sub-grid pass around the current best (v, w) cell."""
    err, v0, w0, used = best
    vs = np.linspace(max(v0 - dv, 0.0), v0 + dv, 16)
    ws = np.clip(np.linspace(w0 - dw, w0 + dw, 16), w_lo, w_hi)
    e, v, w, n = match_scan(y, u, ws, vs, eps, err)
    if e < err:
        err, v0, w0 = e, v, w
    return (err, v0, w0, used + n)


def search_sine_match(y, eps: float, budget: int = 10**7, seed: int = 0,
                      y_lo=None, y_hi=None) -> SineMatch:
    """Find (u, v, w) with max_k |u sin(v sin(kw)) - y_k| < eps.

    u is fixed to max|y_k|; w is explored in (1/(4K), 1/K). A coarse grid
    over expanding v ranges (with best-cell refinement) runs first; the bulk
    of the budget then goes to an exact interval-intersection sweep that
    enumerates, per w, the v-intervals satisfying every constraint, counting
    each inspected candidate interval against the budget. When y_lo/y_hi are
    given, the interval phase accepts any value inside [y_lo_k, y_hi_k]
    widened by eps (the targets y_k stay the nominal centers). On budget
    exhaustion the best candidate is returned with success=False; existence
    is guaranteed in principle, the search is budget-bounded.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    K = y.size
    if K < 1:
        raise RangeError("need at least one target value")
    if eps <= 0:
        raise RangeError("eps must be positive")
    u = float(np.max(np.abs(y)))
    w_lo, w_hi = 1.0 / (4.0 * K), 1.0 / K
    w_mid = 0.5 * (w_lo + w_hi)
    if u == 0.0:
        return SineMatch(0.0, 0.0, w_mid, 0.0, K, True, 0, tuple(y))
    if eps > 2.0 * u:
        err = float(np.max(np.abs(y)))  # v = 0 -> the net is identically 0
        return SineMatch(u, 0.0, w_mid, err, K, True, 0, tuple(y))
    if y_lo is None:
        y_lo = y
    if y_hi is None:
        y_hi = y
    y_lo = np.asarray(y_lo, dtype=np.float64).ravel()
    y_hi = np.asarray(y_hi, dtype=np.float64).ravel()

    def band_err(v, w):
        s = u * np.sin(v * np.sin(np.arange(1, K + 1) * w))
        return float(np.max(np.maximum(y_lo - s, s - y_hi)))

    ws = np.linspace(w_lo, w_hi, 514)[1:-1]  # 512 interior w samples
    best = (np.inf, 0.0, w_mid, 0)
    used = 0

    # coarse scan over expanding v ranges, matching the nominal centers
    nv = max(int(0.2 * budget) // (4 * ws.size), 2)
    for r in (1, 2, 3, 4):
        if used >= budget:
            break
        vs = np.linspace(0.0, 10.0**r, nv)
        e, v, w, n = match_scan(y, u, ws, vs, eps, best[0])
        used += n
        if e < best[0]:
            best = (e, v, w, used)
        if best[0] < eps:
            break
        dv, dw = 10.0**r / (nv - 1), (w_hi - w_lo) / 511.0
        for _ in range(2):  # two 16x16 refinements of the best cell
            if best[0] < eps or used >= budget:
                break
            err, v0, w0, used = _refine(y, u, eps, (best[0], best[1], best[2],
                                                    used), dv, dw,
                                        budget - used, w_lo, w_hi)
            best = (err, v0, w0, used)
            dv, dw = dv / 8.0, dw / 8.0

    # exact interval-intersection sweep over widened bands
    if best[0] >= eps:
        lo_b = y_lo - 0.98 * eps
        hi_b = y_hi + 0.98 * eps
        ws_iv = np.linspace(w_lo, w_hi, 66)[1:-1]
        v, w, n = _interval_search(lo_b, hi_b, u, ws_iv, 5.0e6,
                                   budget - used)
        used += n
        if v is not None:
            err = max(band_err(v, w), 0.0)
            if err < best[0] or err < eps:
                best = (err, v, w, used)

    err, v, w = best[0], best[1], best[2]
    # success means inside the (possibly widened) bands within eps
    ok = band_err(v, w) < eps if np.isfinite(err) else False
    return SineMatch(u, float(v), float(w), float(err), K, bool(ok),
                     int(used), tuple(y))


# ---------------------------------------------------------------------------
# SinTU -> ReLU approximant
# ---------------------------------------------------------------------------

def _sintu(s: float, x):
    return np.sin(np.maximum(np.asarray(x, dtype=np.float64), s))


@dataclass(frozen=True)
class SintuReluApprox:
    """phi_eps approximating ReLU, realized by at most 2 SinTU_s neurons."""

    s: float
    eps: float
    case: int  # 1: cos(s) != 0; 2: cos(s) == 0
    eta: float = 0.0  # case-2 inner difference step

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        s, eps = self.s, self.eps
        if self.case == 1:
            L = np.cos(s)
            return (_sintu(s, s + eps * x) - np.sin(s)) / (L * eps)
        eta, Lt = self.eta, -np.sin(s)

        def h(z):
            return (_sintu(s, z + eta) - _sintu(s, z)) / eta

        return (h(s + eps * x) - h(s)) / (Lt * eps)


def sintu_relu_approx(s: float, eps: float) -> SintuReluApprox:
    """ReLU approximant built from SinTU_s; sup error on [-B,B] -> 0 as
    eps -> 0.

    cos(s) != 0 uses the direct difference quotient of SinTU at its threshold;
    cos(s) == 0 (s an odd multiple of pi/2) differences the derivative with an
    inner step eta = eps^2.
    """
    if not 0.0 < eps < 1.0:
        raise RangeError("eps must lie in (0, 1)")
    if abs(np.cos(s)) > 1e-12:
        return SintuReluApprox(s=float(s), eps=float(eps), case=1)
    return SintuReluApprox(s=float(s), eps=float(eps), case=2,
                           eta=float(eps) ** 2)


# ---------------------------------------------------------------------------
# modulus of continuity and the 1-D theorem assembler
# ---------------------------------------------------------------------------

def modulus_estimate(f, t: float, n_samples: int = 4096,
                     domain=(0.0, 1.0)) -> float:
    """Lower estimate of omega_f(t) = sup{|f(x)-f(y)| : |x-y| <= t}.

    Max over all grid pairs at distance <= t on an n_samples-point lattice;
    the true modulus is >= this estimate.
    """
    if t < 0:
        raise RangeError("t must be >= 0")
    a, b = domain
    xs = np.linspace(a, b, n_samples)
    fs = np.asarray(f(xs), dtype=np.float64)
    h = (b - a) / (n_samples - 1)
    max_shift = min(int(t / h), n_samples - 1)
    best = 0.0
    for sft in range(1, max_shift + 1):
        d = float(np.max(np.abs(fs[sft:] - fs[:-sft])))
        if d > best:
            best = d
    return best


@dataclass
class TheoremNet1d:
    """phi2(phi1(x)): floor-net index map composed with a two-sine readout."""

    N: int
    L: int
    delta: float
    eps: float
    M: int
    x_reps: np.ndarray
    floor_net: FloorNet
    match: SineMatch

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        k = self.floor_net(self.M * x)  # cell index 0..M-1 on kept cells
        return self.match(k + 1.0)


def build_theorem_net_1d(f, N: int, L: int, delta: float = 1e-3,
                         match_budget: int = 10**7):
    """Assemble the 1-D theorem network for continuous f on [0, 1].

    Cells Q_k = [k/M, (k+1)/M] with M = N^L; the floor net maps x to the cell
    index, the sine match reads out f at the cell midpoints with tolerance
    eps = omega_f(1/M)/11. Returns (net, measured L1 error, bound) where
    bound = 2*omega_f(1/M); the measured Monte-Carlo error must not exceed it.
    """
    fn = f if callable(f) else None
    if fn is None:
        raise RangeError("f must be callable on [0, 1]")
    M = N ** L
    omega = modulus_estimate(fn, 1.0 / M)
    eps = omega / 11.0
    if eps == 0.0:
        # constant f: the theorem tolerance degenerates, fall back to a
        # scale-relative tolerance so the readout can still be matched
        x_mid = (np.arange(M) + 0.5) / M
        eps = (1.0 + float(np.max(np.abs(fn(x_mid))))) / 100.0
    # nominal representatives: cell midpoints; the readout may match any
    # f-value attained on the cell, after which the representative is moved
    # to a cell point realizing it (the error bound only needs x_k in Q_k)
    x_reps = (np.arange(M) + 0.5) / M
    y = np.asarray(fn(x_reps), dtype=np.float64)
    grid = np.linspace(0.0, 1.0, 257)[None, :] / M \
        + (np.arange(M) / M)[:, None]
    fgrid = np.asarray(fn(grid.ravel()), dtype=np.float64).reshape(M, -1)
    match = search_sine_match(y, eps, budget=match_budget,
                              y_lo=fgrid.min(axis=1), y_hi=fgrid.max(axis=1))
    if match.success:
        # re-anchor each representative at the cell point closest in value
        phi2 = match(np.arange(1, M + 1))
        idx = np.argmin(np.abs(fgrid - phi2[:, None]), axis=1)
        x_reps = grid[np.arange(M), idx]
        y = fgrid[np.arange(M), idx]
        match.targets = tuple(y)
        match.achieved_eps = float(np.max(np.abs(phi2 - y)))
        match.success = bool(match.achieved_eps < eps)
    floor_net = build_floor_net(N, L, delta)
    net = TheoremNet1d(N=N, L=L, delta=delta, eps=eps, M=M, x_reps=x_reps,
                       floor_net=floor_net, match=match)
    if not match.success:
        raise ConstructionError(
            f"sine match budget exhausted: best {match.achieved_eps} "
            f">= eps {eps}", artifact=net)
    rng = PrngState(seed=20240_1)
    xs = rng.uniforms(10**5, 0.0, 1.0)
    measured = float(np.mean(np.abs(net(xs) - np.asarray(fn(xs)))))
    bound = 2.0 * omega
    return net, measured, bound
