"""Finite-difference helpers used across the package.

All routines accept batched inputs: ``x`` may carry arbitrary leading axes
in front of the coordinate axis, and the supplied callables must broadcast
the same way.  Steps are chosen per coordinate as ``scale * max(1, |x_i|)``
so that probes far from the origin do not lose relative resolution.
"""
from __future__ import annotations

import numpy as np

# First derivatives of clean (non-FD-backed) quantities.
STEP_FIRST = 1e-5
# Step for differentiating quantities that are themselves FD-backed; larger
# so the inner roundoff noise is not amplified.
STEP_NOISY = 5e-4
# Christoffel derivatives inside the curvature contraction.
STEP_CURVATURE = 1e-4


def steps(x: np.ndarray, scale: float) -> np.ndarray:
    """Per-coordinate central-difference steps ``scale * max(1, |x|)``."""
    return scale * np.maximum(1.0, np.abs(x))


def grad_scalar(f, x: np.ndarray, scale: float = STEP_FIRST) -> np.ndarray:
    """Central-difference gradient of a scalar field f: (..., d) -> (...)."""
    x = np.asarray(x, dtype=float)
    h = steps(x, scale)
    d = x.shape[-1]
    out = np.empty_like(x)
    for l in range(d):
        xp = x.copy()
        xm = x.copy()
        xp[..., l] += h[..., l]
        xm[..., l] -= h[..., l]
        out[..., l] = (f(xp) - f(xm)) / (2.0 * h[..., l])
    return out


def jacobian(f, x: np.ndarray, scale: float = STEP_FIRST) -> np.ndarray:
    """Central-difference Jacobian of f: (..., d) -> (..., m).

    Returns an array of shape (..., m, d) with ``out[..., i, l] = df_i/dx_l``.
    """
    x = np.asarray(x, dtype=float)
    h = steps(x, scale)
    d = x.shape[-1]
    cols = []
    for l in range(d):
        xp = x.copy()
        xm = x.copy()
        xp[..., l] += h[..., l]
        xm[..., l] -= h[..., l]
        cols.append((f(xp) - f(xm)) / (2.0 * h[..., l])[..., None])
    return np.stack(cols, axis=-1)


def grad_scalar_o4(f, x: np.ndarray, scale: float = 1e-3) -> np.ndarray:
    """Fourth-order central gradient, used as an independent test oracle."""
    x = np.asarray(x, dtype=float)
    h = steps(x, scale)
    d = x.shape[-1]
    out = np.empty_like(x)
    for l in range(d):
        shifted = []
        for c in (2.0, 1.0, -1.0, -2.0):
            xs = x.copy()
            xs[..., l] += c * h[..., l]
            shifted.append(f(xs))
        out[..., l] = (-shifted[0] + 8.0 * shifted[1] - 8.0 * shifted[2]
                       + shifted[3]) / (12.0 * h[..., l])
    return out
