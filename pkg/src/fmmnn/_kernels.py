"""Hot numeric kernels.

Each kernel has a numba @njit implementation and a pure-numpy fallback.
The numpy path is selected by setting the environment variable
``FMMNN_PURE_NUMPY=1`` (or when numba is not importable). Both paths
implement the same arithmetic; see benchmarks/bench_kernels.py.
"""

from __future__ import annotations

import math
import os

import numpy as np

PURE_NUMPY = os.environ.get("FMMNN_PURE_NUMPY", "").lower() in ("1", "true", "yes")

if not PURE_NUMPY:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        PURE_NUMPY = True

USE_NUMBA = not PURE_NUMPY

# integer tags shared by both paths
TAG_RELU, TAG_GELU, TAG_ELU, TAG_SIGMOID = 0, 1, 2, 3
TAG_TANH, TAG_SINE, TAG_COSINE, TAG_SINTU = 4, 5, 6, 7

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _act_triple_numpy(tag: int, s: float, x: np.ndarray):
    """(value, d1, d2) of the tagged activation, elementwise."""
    if tag == TAG_RELU:
        pos = x >= 0.0
        return np.where(pos, x, 0.0), np.where(pos, 1.0, 0.0), np.zeros_like(x)
    if tag == TAG_GELU:
        # exact Gaussian-CDF form
        cdf = 0.5 * (1.0 + _erf_np(x * _INV_SQRT2))
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        return x * cdf, cdf + x * pdf, (2.0 - x * x) * pdf
    if tag == TAG_ELU:
        pos = x >= 0.0
        ex = np.exp(np.minimum(x, 0.0))
        return (np.where(pos, x, ex - 1.0),
                np.where(pos, 1.0, ex),
                np.where(pos, 0.0, ex))
    if tag == TAG_SIGMOID:
        sg = 1.0 / (1.0 + np.exp(-x))
        d1 = sg * (1.0 - sg)
        return sg, d1, d1 * (1.0 - 2.0 * sg)
    if tag == TAG_TANH:
        t = np.tanh(x)
        d1 = 1.0 - t * t
        return t, d1, -2.0 * t * d1
    if tag == TAG_SINE:
        sn = np.sin(x)
        return sn, np.cos(x), -sn
    if tag == TAG_COSINE:
        cs = np.cos(x)
        return cs, -np.sin(x), -cs
    # SinTU_s: sin(max(x, s)); constant sin(s) below the threshold
    live = x >= s
    t = np.where(live, x, s)
    sn, cs = np.sin(t), np.cos(t)
    return sn, np.where(live, cs, 0.0), np.where(live, -sn, 0.0)


def _erf_np(x: np.ndarray) -> np.ndarray:
    from scipy.special import erf

    return erf(x)


if USE_NUMBA:

    @njit(cache=True)
    def _act_triple_numba(tag, s, x):
        n = x.size
        v = np.empty(n)
        d1 = np.empty(n)
        d2 = np.empty(n)
        for i in range(n):
            xi = x[i]
            if tag == 0:  # relu
                if xi >= 0.0:
                    v[i], d1[i], d2[i] = xi, 1.0, 0.0
                else:
                    v[i], d1[i], d2[i] = 0.0, 0.0, 0.0
            elif tag == 1:  # gelu
                cdf = 0.5 * (1.0 + math.erf(xi * _INV_SQRT2))
                pdf = _INV_SQRT_2PI * math.exp(-0.5 * xi * xi)
                v[i] = xi * cdf
                d1[i] = cdf + xi * pdf
                d2[i] = (2.0 - xi * xi) * pdf
            elif tag == 2:  # elu, alpha = 1
                if xi >= 0.0:
                    v[i], d1[i], d2[i] = xi, 1.0, 0.0
                else:
                    ex = math.exp(xi)
                    v[i], d1[i], d2[i] = ex - 1.0, ex, ex
            elif tag == 3:  # sigmoid
                sg = 1.0 / (1.0 + math.exp(-xi))
                g = sg * (1.0 - sg)
                v[i], d1[i], d2[i] = sg, g, g * (1.0 - 2.0 * sg)
            elif tag == 4:  # tanh
                t = math.tanh(xi)
                g = 1.0 - t * t
                v[i], d1[i], d2[i] = t, g, -2.0 * t * g
            elif tag == 5:  # sine
                v[i], d1[i], d2[i] = math.sin(xi), math.cos(xi), -math.sin(xi)
            elif tag == 6:  # cosine
                v[i], d1[i], d2[i] = math.cos(xi), -math.sin(xi), -math.cos(xi)
            else:  # sintu
                if xi >= s:
                    v[i], d1[i], d2[i] = math.sin(xi), math.cos(xi), -math.sin(xi)
                else:
                    v[i], d1[i], d2[i] = math.sin(s), 0.0, 0.0
        return v, d1, d2


def act_triple(tag: int, s: float, x: np.ndarray):
    """Dispatch to the active path; preserves the input's shape."""
    x = np.asarray(x, dtype=np.float64)
    if USE_NUMBA:
        v, d1, d2 = _act_triple_numba(tag, s, x.ravel())
        return v.reshape(x.shape), d1.reshape(x.shape), d2.reshape(x.shape)
    return _act_triple_numpy(tag, s, x)


# ---------------------------------------------------------------------------
# sine point-matching scan: minimize max_k |u sin(v sin(k w)) - y_k|
# ---------------------------------------------------------------------------

def _match_scan_numpy(y, u, ws, vs, eps, best_err):
    k = np.arange(1, y.size + 1, dtype=np.float64)
    best_v = best_w = 0.0
    evals = 0
    for w in ws:
        a = np.sin(k * w)
        errs = np.abs(u * np.sin(np.outer(vs, a)) - y).max(axis=1)
        evals += vs.size
        i = int(np.argmin(errs))
        if errs[i] < best_err:
            best_err, best_v, best_w = float(errs[i]), float(vs[i]), float(w)
            if best_err < eps:
                break
    return best_err, best_v, best_w, evals


if USE_NUMBA:

    @njit(cache=True)
    def _match_scan_numba(y, u, ws, vs, eps, best_err):
        K = y.size
        best_v = 0.0
        best_w = 0.0
        evals = 0
        a = np.empty(K)
        done = False
        for iw in range(ws.size):
            w = ws[iw]
            for k in range(K):
                a[k] = math.sin((k + 1) * w)
            for iv in range(vs.size):
                v = vs[iv]
                evals += 1
                m = 0.0
                for k in range(K):
                    e = abs(u * math.sin(v * a[k]) - y[k])
                    if e > m:
                        m = e
                        if m >= best_err:  # cannot improve; stop early
                            break
                if m < best_err:
                    best_err = m
                    best_v = v
                    best_w = w
                    if best_err < eps:
                        done = True
                        break
            if done:
                break
        return best_err, best_v, best_w, evals


def match_scan(y, u, ws, vs, eps, best_err=np.inf):
    """Scan the (w, v) candidate grid; returns (err, v, w, evaluations).

    Early-exits once an error below ``eps`` is found.
    """
    y = np.asarray(y, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    vs = np.asarray(vs, dtype=np.float64)
    if USE_NUMBA:
        return _match_scan_numba(y, float(u), ws, vs, float(eps), float(best_err))
    return _match_scan_numpy(y, float(u), ws, vs, float(eps), float(best_err))
