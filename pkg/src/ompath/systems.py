"""Benchmark SDE models and user-defined systems.

Every model is a :class:`SystemModel`: a drift field, a square diffusion
matrix and optional analytic derivatives.  Callbacks are vectorized — they
accept states of shape ``(..., d)`` and broadcast over the leading axes.
Factory functions wrap scalar (non-vectorized) user callbacks on request.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _fd
from .errors import (DerivativeMismatch, DimensionMismatch, InvalidParams,
                     NonpositiveNoise, SingularDiffusion)

# Eigenvalue floor below which sigma sigma^T counts as singular.
SPD_FLOOR = 1e-12


@dataclass(frozen=True)
class SystemModel:
    """One SDE  dX = drift(X) dt + diffusion(X) dB  on R^d.

    Attributes
    ----------
    dim : int
        State dimension d.
    noise_dim : int
        Brownian dimension k; this package requires k == d so that
        sigma sigma^T is invertible wherever sigma is nondegenerate.
    drift : callable
        (..., d) -> (..., d).
    diffusion : callable
        (..., d) -> (..., d, d).
    drift_jacobian : callable, optional
        (..., d) -> (..., d, d) with out[..., i, j] = d drift_i / d x_j.
    diffusion_partials : callable, optional
        (..., d) -> (..., d, d, d) with out[..., i, j, l] = d sigma_ij / d x_l.
    constant_diffusion : bool
        True when sigma does not depend on x; lets the geometry take the
        flat-metric shortcuts (zero Christoffel symbols and curvature).
    curvature : callable, optional
        Analytic scalar-curvature override, (..., d) -> (...).
    """

    dim: int
    noise_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    diffusion: Callable[[np.ndarray], np.ndarray]
    drift_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    diffusion_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "system"
    constant_diffusion: bool = False
    curvature: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParams("state dimension must be positive")
        if self.noise_dim != self.dim:
            raise DimensionMismatch(
                f"square diffusion required: noise_dim {self.noise_dim} != dim {self.dim}")


@dataclass(frozen=True)
class NpzParams:
    """Parameters of the nutrient-phytoplankton-zooplankton model.

    Defaults reproduce the bistable regime (stable coexistence equilibrium
    plus a stable limit cycle).  ``sigma`` holds the three additive noise
    intensities.
    """

    D: float = 0.1
    N0: float = 9.96
    a: float = 1.0
    b: float = 1.0
    alpha: float = 1.0
    c: float = 5.0
    d: float = 0.1
    D1: float = 0.2
    beta: float = 0.5
    D2: float = 2.1
    sigma: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        for name in ("D", "N0", "a", "b", "alpha", "c", "d", "D1", "beta", "D2"):
            if not np.isfinite(getattr(self, name)) or getattr(self, name) <= 0:
                raise InvalidParams(f"NPZ parameter {name} must be positive")
        sig = tuple(float(s) for s in self.sigma)
        if len(sig) != 3 or any(not np.isfinite(s) or s < 0 for s in sig):
            raise InvalidParams("NPZ sigma must be 3 nonnegative intensities")
        object.__setattr__(self, "sigma", sig)


def _constant_diffusion_callbacks(matrix: np.ndarray):
    matrix = np.array(matrix, dtype=float)
    d = matrix.shape[0]

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(matrix, x.shape[:-1] + (d, d)).copy()

    def partials(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (d, d, d))

    return diffusion, partials


def make_double_well(sigma: float = 1.0) -> SystemModel:
    """1-d double-well system: drift x - x^3, constant noise intensity."""
    if not np.isfinite(sigma) or sigma <= 0:
        raise NonpositiveNoise(f"noise intensity must be positive, got {sigma}")
    sigma = float(sigma)

    def drift(x):
        x = np.asarray(x, dtype=float)
        return x - x ** 3

    def jac(x):
        x = np.asarray(x, dtype=float)
        return (1.0 - 3.0 * x ** 2)[..., None]

    diffusion, partials = _constant_diffusion_callbacks(np.array([[sigma]]))
    return SystemModel(1, 1, drift, diffusion, jac, partials,
                       label="double_well", constant_diffusion=True)


def make_maier_stein(gamma: float = 1.0, epsilon: float = 0.1) -> SystemModel:
    """Maier-Stein system, multiplicative noise diag(1 + eps x^2, 1)."""
    if not np.isfinite(gamma):
        raise InvalidParams("gamma must be finite")
    if not np.isfinite(epsilon) or epsilon < 0:
        raise InvalidParams("epsilon must be nonnegative")
    gamma = float(gamma)
    eps = float(epsilon)

    def drift(z):
        z = np.asarray(z, dtype=float)
        x, y = z[..., 0], z[..., 1]
        return np.stack([x - x ** 3 - gamma * x * y ** 2,
                         -(1.0 + x ** 2) * y], axis=-1)

    def jac(z):
        z = np.asarray(z, dtype=float)
        x, y = z[..., 0], z[..., 1]
        out = np.empty(z.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0 - 3.0 * x ** 2 - gamma * y ** 2
        out[..., 0, 1] = -2.0 * gamma * x * y
        out[..., 1, 0] = -2.0 * x * y
        out[..., 1, 1] = -(1.0 + x ** 2)
        return out

    def diffusion(z):
        z = np.asarray(z, dtype=float)
        x = z[..., 0]
        out = np.zeros(z.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0 + eps * x ** 2
        out[..., 1, 1] = 1.0
        return out

    def partials(z):
        z = np.asarray(z, dtype=float)
        x = z[..., 0]
        out = np.zeros(z.shape[:-1] + (2, 2, 2))
        out[..., 0, 0, 0] = 2.0 * eps * x
        return out

    return SystemModel(2, 2, drift, diffusion, jac, partials,
                       label="maier_stein", constant_diffusion=(eps == 0.0))


def make_npz(params: NpzParams | None = None) -> SystemModel:
    """Stochastic NPZ model with piecewise nutrient uptake.

    The uptake f(N) = (b/a) N for N <= a and f(N) = b above; it is continuous
    at N = a but not differentiable there, and the Jacobian uses the lower
    branch value b/a exactly at the kink.  Grazing is g(P) = c P / (1 + d P).
    Noise is additive, diag(sigma).
    """
    p = params if params is not None else NpzParams()
    if not isinstance(p, NpzParams):
        raise InvalidParams("make_npz expects an NpzParams instance")

    def uptake(N):
        return np.where(N <= p.a, (p.b / p.a) * N, p.b)

    def uptake_prime(N):
        return np.where(N <= p.a, p.b / p.a, 0.0)

    def drift(X):
        X = np.asarray(X, dtype=float)
        N, P, Z = X[..., 0], X[..., 1], X[..., 2]
        f = uptake(N)
        g = p.c * P / (1.0 + p.d * P)
        return np.stack([
            p.D * (p.N0 - N) - f * P,
            p.alpha * f * P - g * Z - p.D1 * P,
            p.beta * g * Z - p.D2 * Z,
        ], axis=-1)

    def jac(X):
        X = np.asarray(X, dtype=float)
        N, P, Z = X[..., 0], X[..., 1], X[..., 2]
        f = uptake(N)
        fp = uptake_prime(N)
        g = p.c * P / (1.0 + p.d * P)
        gp = p.c / (1.0 + p.d * P) ** 2
        out = np.zeros(X.shape[:-1] + (3, 3))
        out[..., 0, 0] = -p.D - fp * P
        out[..., 0, 1] = -f
        out[..., 1, 0] = p.alpha * fp * P
        out[..., 1, 1] = p.alpha * f - gp * Z - p.D1
        out[..., 1, 2] = -g
        out[..., 2, 1] = p.beta * gp * Z
        out[..., 2, 2] = p.beta * g - p.D2
        return out

    diffusion, partials = _constant_diffusion_callbacks(np.diag(p.sigma))
    return SystemModel(3, 3, drift, diffusion, jac, partials,
                       label="npz", constant_diffusion=True)


def _rowwise(fn, trailing_shape):
    """Wrap a single-point callback so it broadcasts over leading axes."""

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.asarray(fn(x), dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        out = np.stack([np.asarray(fn(row), dtype=float) for row in flat])
        return out.reshape(x.shape[:-1] + trailing_shape)

    return wrapped


def make_custom(dim: int,
                drift,
                diffusion,
                drift_jacobian=None,
                diffusion_partials=None,
                label: str = "custom",
                vectorized: bool = False,
                constant_diffusion: bool = False,
                probe_points=None,
                probe_seed: int = 20250809) -> SystemModel:
    """Build a validated SystemModel from user callbacks.

    The diffusion is checked for nondegeneracy, and any analytic derivative
    callbacks are verified against central finite differences, at 20 probe
    points (standard-normal draws unless ``probe_points`` is given).

    Raises
    ------
    SingularDiffusion
        sigma sigma^T has an eigenvalue below 1e-12 at a probe point.
    DerivativeMismatch
        An analytic derivative differs from finite differences by more
        than 1e-4 relative at a probe point.
    """
    dim = int(dim)
    if dim < 1:
        raise InvalidParams("dim must be positive")
    if not vectorized:
        drift = _rowwise(drift, (dim,))
        diffusion = _rowwise(diffusion, (dim, dim))
        if drift_jacobian is not None:
            drift_jacobian = _rowwise(drift_jacobian, (dim, dim))
        if diffusion_partials is not None:
            diffusion_partials = _rowwise(diffusion_partials, (dim, dim, dim))

    if probe_points is None:
        rng = np.random.default_rng(probe_seed)
        probe_points = rng.standard_normal((20, dim))
    probes = np.asarray(probe_points, dtype=float).reshape(-1, dim)

    b = np.asarray(drift(probes), dtype=float)
    if b.shape != probes.shape:
        raise DimensionMismatch(f"drift returned shape {b.shape}, expected {probes.shape}")
    sig = np.asarray(diffusion(probes), dtype=float)
    if sig.shape != probes.shape + (dim,):
        raise DimensionMismatch(
            f"diffusion returned shape {sig.shape}, expected {probes.shape + (dim,)}")
    ssq = np.einsum("...ik,...jk->...ij", sig, sig)
    smallest = np.linalg.eigvalsh(ssq)[..., 0]
    if np.any(smallest < SPD_FLOOR):
        i = int(np.argmax(smallest < SPD_FLOOR))
        raise SingularDiffusion(
            f"sigma sigma^T eigenvalue {smallest[i]:.3e} < {SPD_FLOOR} at probe {probes[i]}")

    def _check(name, analytic, reference):
        scale = max(1.0, float(np.max(np.abs(reference))))
        err = float(np.max(np.abs(analytic - reference))) / scale
        if err > 1e-4:
            raise DerivativeMismatch(
                f"{name} disagrees with finite differences: relative error {err:.3e}")

    if drift_jacobian is not None:
        _check("drift_jacobian", np.asarray(drift_jacobian(probes), dtype=float),
               _fd.jacobian(drift, probes))
    if diffusion_partials is not None:
        flat_sigma = lambda x: np.asarray(diffusion(x), dtype=float).reshape(
            x.shape[:-1] + (dim * dim,))
        fd = _fd.jacobian(flat_sigma, probes).reshape(probes.shape[:-1] + (dim, dim, dim))
        _check("diffusion_partials", np.asarray(diffusion_partials(probes), dtype=float), fd)

    return SystemModel(dim, dim, drift, diffusion, drift_jacobian,
                       diffusion_partials, label=label,
                       constant_diffusion=constant_diffusion)
