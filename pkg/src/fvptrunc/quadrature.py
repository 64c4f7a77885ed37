"""Exponential-kernel quadrature on uniform time grids.

Everything here evaluates integrals of the form

    I(t_k) = int_{t_k}^{tau} e^{lam (s - t_k)} w(s) ds,      lam >= 0,

for w sampled at the grid points, plus the plain backward cumulative
integral W(t_k) = int_{t_k}^{tau} w ds.  The kernel is integrated exactly
against a piecewise-polynomial interpolant of w:

  order 2 -- piecewise-linear interpolant; per-interval antiderivatives
             use the scaled functions (e^z - 1)/z and (e^z - 1 - z)/z^2,
             evaluated by series for small z to avoid cancellation.
  order 6 -- degree-5 interpolant on a sliding 6-point stencil; the
             weighted moments int_0^1 s^m e^{z s} ds come from the
             confluent hypergeometric function, which is stable for all
             z >= 0 of interest.

Per-mode arithmetic only ever uses growth factors e^{lam (s - t)} with
s >= t (the per-interval factor e^{lam h} inside a backward recurrence),
so magnitudes never exceed what the mathematical result requires.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import lfilter
from scipy.special import hyp1f1

from .errors import ExponentOverflowError

#: interpolation orders accepted by the routines below
ORDERS = (2, 6)

#: convergence order of the composite scheme, keyed by `order`
SCHEME_ORDER = {2: 2, 6: 6}


def phi1(z: float) -> float:
    """(e^z - 1)/z, continuously extended through z = 0."""
    if abs(z) < 1e-8:
        return 1.0 + z * (0.5 + z / 6.0)
    return math.expm1(z) / z


def phi2(z: float) -> float:
    """(e^z - 1 - z)/z^2, by series for small |z| (direct form cancels)."""
    if abs(z) < 0.35:
        term = 0.5
        acc = term
        for k in range(3, 24):
            term *= z / k
            acc += term
            if abs(term) < 1e-18 * abs(acc):
                break
        return acc
    return (math.expm1(z) - z) / (z * z)


def _pl_interval_weights(z: float) -> np.ndarray:
    """Weights (a0, a1): int_0^1 e^{z s} (w0 (1-s) + w1 s) ds = a0 w0 + a1 w1."""
    p1 = phi1(z)
    p2 = phi2(z)
    return np.array([p1 - p2, p2])


def _exp_moments(z: float, mmax: int) -> np.ndarray:
    """M_m = int_0^1 s^m e^{z s} ds for m = 0..mmax."""
    m = np.arange(mmax + 1)
    vals = hyp1f1(m + 1, m + 2, z) / (m + 1)
    if not np.all(np.isfinite(vals)):
        raise ExponentOverflowError(f"exponential moments overflow at z = {z:.6g}")
    return vals


def lagrange_exp_weights(offsets: np.ndarray, z: float) -> np.ndarray:
    """Quadrature weights a_o with int_0^1 L_o(s) e^{z s} ds = a_o.

    `offsets` are the stencil node positions in units of the grid spacing,
    relative to the left end of the unit interval being integrated.
    """
    offsets = np.asarray(offsets, dtype=float)
    k = offsets.size
    V = np.vander(offsets, k, increasing=True)
    # column o of V^{-1} holds the monomial coefficients of L_o
    Vinv = np.linalg.inv(V)
    return Vinv.T @ _exp_moments(z, k - 1)


from functools import lru_cache


@lru_cache(maxsize=256)
def _interval_weight_table(n_steps: int, z: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-interval stencil weights for a grid with n_steps intervals.

    Returns (bases, weights): interval i integrates to
    h * dot(weights[i], w[bases[i] : bases[i] + k]).  Cached because the
    table depends only on (grid size, lam * h, order) and is reused across
    fixed-point iterations.
    """
    if order == 2:
        k = 2
        bases = np.arange(n_steps)
        weights = np.tile(_pl_interval_weights(z), (n_steps, 1))
    else:
        k = 6
        if n_steps + 1 < k:
            raise ValueError(f"order-6 quadrature needs at least {k} grid points")
        bases = np.clip(np.arange(n_steps) - 2, 0, n_steps + 1 - k)
        weights = np.empty((n_steps, k))
        # distinct stencil shapes: leftmost node offset relative to interval start
        for shift in range(-(k - 2), 1):
            rows = (bases - np.arange(n_steps)) == shift
            if np.any(rows):
                weights[rows] = lagrange_exp_weights(np.arange(shift, shift + k), z)
    bases.flags.writeable = False
    weights.flags.writeable = False
    return bases, weights


def _interval_integrals(w: np.ndarray, h: float, z: float, order: int) -> np.ndarray:
    """A_i = int_{t_i}^{t_{i+1}} e^{z (s - t_i)/h} w_interp(s) ds, all intervals."""
    n = w.size - 1
    bases, weights = _interval_weight_table(n, z, order)
    k = weights.shape[1]
    if order == 2:
        A = weights[:, 0] * w[:-1] + weights[:, 1] * w[1:]
    else:
        idx = bases[:, None] + np.arange(k)[None, :]
        A = np.einsum("ik,ik->i", weights, w[idx])
    return h * A


def exp_kernel_profile(lam: float, h: float, w: np.ndarray, order: int = 2) -> np.ndarray:
    """I(t_k) = int_{t_k}^{tau} e^{lam (s - t_k)} w_interp(s) ds at every grid point.

    Uses the backward recurrence I_k = A_k + e^{lam h} I_{k+1}, which keeps
    every factor of the form e^{lam (s - t)} with s >= t.
    """
    if lam < 0.0:
        raise ValueError("kernel rate lam must be >= 0")
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    w = np.asarray(w, dtype=float)
    n = w.size - 1
    if n < 1:
        raise ValueError("need at least two grid points")
    z = lam * h
    if z > 700.0:
        raise ExponentOverflowError(
            f"per-interval growth e^(lam h) overflows (lam h = {z:.6g})")
    A = _interval_integrals(w, h, z, order)
    E = math.exp(z)
    # y[m] = A_rev[m] + E y[m-1]  ==>  y reversed is I_0..I_{n-1}
    y = lfilter([1.0], [1.0, -E], A[::-1])
    out = np.zeros(n + 1)
    out[:-1] = y[::-1]
    if not np.all(np.isfinite(out)):
        raise ExponentOverflowError(
            f"exponential-kernel integral overflows for lam = {lam:.6g}")
    return out


def backward_cumulative(h: float, w: np.ndarray, order: int = 2) -> np.ndarray:
    """W(t_k) = int_{t_k}^{tau} w_interp(s) ds at every grid point."""
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    w = np.asarray(w, dtype=float)
    inc = _interval_integrals(w, h, 0.0, order)
    out = np.zeros(w.size)
    out[:-1] = np.cumsum(inc[::-1])[::-1]
    return out
