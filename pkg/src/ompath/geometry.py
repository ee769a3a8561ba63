"""Differential geometry induced by a diffusion, and the path action built on it.

A diffusion matrix sigma(x) induces the Riemannian metric
``V(x) = (sigma sigma^T)^{-1}``.  The most probable tube around a path z(t)
of the SDE  dX = drift dt + sigma dB  is governed by the action

    S(z) = 1/2 * integral[ (zdot - b)^T V (zdot - b) + div b - R/6 ] dt,

where b is the drift corrected by a Christoffel contraction, div is the
covariant divergence and R the scalar curvature of the metric.  This module
computes each ingredient pointwise (batched over leading axes) and the
action of a discrete trajectory.

Derivatives use analytic callbacks when the system supplies them, central
finite differences otherwise; systems flagged ``constant_diffusion`` take
the flat-metric shortcuts (zero Christoffel symbols, zero curvature,
Euclidean divergence).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fd
from .errors import SingularDiffusion
from .systems import SPD_FLOOR, SystemModel
from .trajectory import Trajectory, grid_velocity


def _gram(system: SystemModel, x: np.ndarray):
    """sigma(x) and the Gram matrix S = sigma sigma^T, checked for SPD."""
    sig = np.asarray(system.diffusion(x), dtype=float)
    gram = np.einsum("...ik,...jk->...ij", sig, sig)
    smallest = np.linalg.eigvalsh(gram)[..., 0]
    if np.any(smallest < SPD_FLOOR):
        worst = float(np.min(smallest))
        raise SingularDiffusion(
            f"sigma sigma^T eigenvalue {worst:.3e} below {SPD_FLOOR} "
            f"({system.label})")
    return sig, gram


def metric(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Riemannian metric V(x) = (sigma sigma^T)^{-1}, shape (..., d, d)."""
    _, gram = _gram(system, np.asarray(x, dtype=float))
    inv = np.linalg.inv(gram)
    return 0.5 * (inv + np.swapaxes(inv, -1, -2))


def metric_inverse(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Inverse metric g^{ij} = (sigma sigma^T)_{ij}."""
    return _gram(system, np.asarray(x, dtype=float))[1]


def _metric_partials(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """dg[..., i, j, l] = d V_ij / d x_l."""
    d = system.dim
    if system.constant_diffusion:
        return np.zeros(x.shape[:-1] + (d, d, d))
    if system.diffusion_partials is not None:
        sig, gram = _gram(system, x)
        vmat = np.linalg.inv(gram)
        dsig = np.asarray(system.diffusion_partials(x), dtype=float)
        dgram = (np.einsum("...ikl,...jk->...ijl", dsig, sig)
                 + np.einsum("...ik,...jkl->...ijl", sig, dsig))
        return -np.einsum("...im,...mnl,...nj->...ijl", vmat, dgram, vmat)
    h = _fd.steps(x, _fd.STEP_FIRST)
    cols = []
    for l in range(d):
        xp = x.copy()
        xm = x.copy()
        xp[..., l] += h[..., l]
        xm[..., l] -= h[..., l]
        step = (2.0 * h[..., l])[..., None, None]
        cols.append((metric(system, xp) - metric(system, xm)) / step)
    return np.stack(cols, axis=-1)


def christoffel(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Christoffel symbols of V, out[..., i, l, j] = Gamma^i_{lj}.

    Symmetric in the two lower indices by construction.
    """
    x = np.asarray(x, dtype=float)
    d = system.dim
    if system.constant_diffusion:
        _gram(system, x)
        return np.zeros(x.shape[:-1] + (d, d, d))
    _, ginv = _gram(system, x)
    dg = _metric_partials(system, x)
    t1 = np.einsum("...im,...lmj->...ilj", ginv, dg)
    t2 = np.einsum("...im,...jml->...ilj", ginv, dg)
    t3 = np.einsum("...im,...ljm->...ilj", ginv, dg)
    return 0.5 * (t1 + t2 - t3)


def modified_drift(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Drift corrected by the Christoffel contraction.

    b^i = drift^i - 1/2 * sum_{l,j} (V^{-1})^{lj} Gamma^i_{lj}; reduces to the
    raw drift for constant diffusion.
    """
    x = np.asarray(x, dtype=float)
    b = np.asarray(system.drift(x), dtype=float)
    if system.constant_diffusion:
        return b
    _, ginv = _gram(system, x)
    gamma = christoffel(system, x)
    return b - 0.5 * np.einsum("...lj,...ilj->...i", ginv, gamma)


def _volume_density(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """sqrt(det V) = det(sigma sigma^T)^{-1/2}."""
    _, gram = _gram(system, x)
    return 1.0 / np.sqrt(np.linalg.det(gram))


def riemannian_divergence(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Covariant divergence of the modified drift, shape (...).

    div b = (1/sqrt|V|) sum_i d/dx_i (b^i sqrt|V|).  Constant-diffusion
    systems reduce to the Euclidean divergence of the raw drift, read off
    the analytic Jacobian when available; otherwise the product rule term
    is differenced centrally.
    """
    x = np.asarray(x, dtype=float)
    d = system.dim
    if system.constant_diffusion:
        _gram(system, x)
        if system.drift_jacobian is not None:
            jac = np.asarray(system.drift_jacobian(x), dtype=float)
            return np.trace(jac, axis1=-2, axis2=-1)
        h = _fd.steps(x, _fd.STEP_FIRST)
        total = np.zeros(x.shape[:-1])
        for l in range(d):
            xp = x.copy()
            xm = x.copy()
            xp[..., l] += h[..., l]
            xm[..., l] -= h[..., l]
            bp = np.asarray(system.drift(xp), dtype=float)[..., l]
            bm = np.asarray(system.drift(xm), dtype=float)[..., l]
            total = total + (bp - bm) / (2.0 * h[..., l])
        return total
    h = _fd.steps(x, _fd.STEP_FIRST)
    total = np.zeros(x.shape[:-1])
    for l in range(d):
        xp = x.copy()
        xm = x.copy()
        xp[..., l] += h[..., l]
        xm[..., l] -= h[..., l]
        fp = modified_drift(system, xp)[..., l] * _volume_density(system, xp)
        fm = modified_drift(system, xm)[..., l] * _volume_density(system, xm)
        total = total + (fp - fm) / (2.0 * h[..., l])
    return total / _volume_density(system, x)


def scalar_curvature(system: SystemModel, x: np.ndarray) -> np.ndarray:
    """Scalar curvature of the metric, shape (...).

    Contraction of the curvature tensor expressed through Christoffel
    symbols and their first derivatives:

        R = g^{ik} ( d_k Gamma^m_{im} - d_m Gamma^m_{ki}
                     + Gamma^m_{ka} Gamma^a_{mi} - Gamma^m_{ma} Gamma^a_{ki} ).

    Derivatives of the symbols are centrally differenced; a system may
    supply an analytic ``curvature`` callback instead.
    """
    x = np.asarray(x, dtype=float)
    if system.curvature is not None:
        return np.asarray(system.curvature(x), dtype=float)
    d = system.dim
    if system.constant_diffusion:
        _gram(system, x)
        return np.zeros(x.shape[:-1])
    _, ginv = _gram(system, x)
    gamma = christoffel(system, x)
    h = _fd.steps(x, _fd.STEP_CURVATURE)
    dgam = np.empty(x.shape[:-1] + (d, d, d, d))
    for k in range(d):
        xp = x.copy()
        xm = x.copy()
        xp[..., k] += h[..., k]
        xm[..., k] -= h[..., k]
        step = (2.0 * h[..., k])[..., None, None, None]
        dgam[..., k, :, :, :] = (christoffel(system, xp)
                                 - christoffel(system, xm)) / step
    t1 = np.einsum("...ik,...kmim->...", ginv, dgam)
    t2 = np.einsum("...ik,...mmki->...", ginv, dgam)
    t3 = np.einsum("...ik,...mka,...ami->...", ginv, gamma, gamma)
    t4 = np.einsum("...ik,...mma,...aki->...", ginv, gamma, gamma)
    return t1 - t2 + t3 - t4


def lagrangian_velocity(system: SystemModel, x: np.ndarray,
                        v: np.ndarray) -> np.ndarray:
    """Path-space Lagrangian in velocity form.

    L(x, v) = 1/2 [ (v - b)^T V (v - b) + div b - R/6 ].
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    x, v = _broadcast_points(x, v)
    vmat = metric(system, x)
    dev = v - modified_drift(system, x)
    quad = np.einsum("...i,...ij,...j->...", dev, vmat, dev)
    return 0.5 * (quad + riemannian_divergence(system, x)
                  - scalar_curvature(system, x) / 6.0)


def lagrangian_control(system: SystemModel, x: np.ndarray,
                       theta: np.ndarray) -> np.ndarray:
    """Path-space Lagrangian in control form.

    Substituting v = drift + sigma theta gives, with Delta = drift - b,

        L(x, theta) = 1/2 [ (sigma theta + Delta)^T V (sigma theta + Delta)
                            + div b - R/6 ],

    which collapses to 1/2 [ theta^T theta + div b - R/6 ] for additive
    noise (Delta = 0).
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    x, theta = _broadcast_points(x, theta)
    sig, gram = _gram(system, x)
    vmat = np.linalg.inv(gram)
    dev = np.einsum("...ij,...j->...i", sig, theta)
    if not system.constant_diffusion:
        drift = np.asarray(system.drift(x), dtype=float)
        dev = dev + (drift - modified_drift(system, x))
    quad = np.einsum("...i,...ij,...j->...", dev, vmat, dev)
    return 0.5 * (quad + riemannian_divergence(system, x)
                  - scalar_curvature(system, x) / 6.0)


def _broadcast_points(*arrays):
    """Broadcast (..., d) arrays against each other on their leading axes."""
    shapes = [a.shape[:-1] for a in arrays]
    lead = np.broadcast_shapes(*shapes)
    return tuple(np.broadcast_to(a, lead + a.shape[-1:]).copy() for a in arrays)


def om_action(system: SystemModel, traj: Trajectory) -> float:
    """Action of a discrete path: trapezoidal rule over the velocity-form
    Lagrangian, with velocities by centered differences (one-sided at the
    ends).  A zero-length grid has zero action."""
    if traj.times[-1] == traj.times[0]:
        return 0.0
    v = grid_velocity(traj.times, traj.states)
    lag = lagrangian_velocity(system, traj.states, v)
    return float(np.trapezoid(lag, dx=traj.dt))


@dataclass(frozen=True)
class GeometryPoint:
    """All geometric quantities of one state, bundled for inspection."""

    x: np.ndarray
    metric_V: np.ndarray
    metric_inverse: np.ndarray
    christoffel: np.ndarray
    modified_drift_b: np.ndarray
    divergence_b: float
    scalar_curvature_R: float


def geometry_point(system: SystemModel, x: np.ndarray) -> GeometryPoint:
    """Evaluate the full geometric bundle at a single state."""
    x = np.asarray(x, dtype=float)
    if x.shape != (system.dim,):
        raise ValueError(f"expected a single state of shape ({system.dim},)")
    return GeometryPoint(
        x=x,
        metric_V=metric(system, x),
        metric_inverse=metric_inverse(system, x),
        christoffel=christoffel(system, x),
        modified_drift_b=modified_drift(system, x),
        divergence_b=float(riemannian_divergence(system, x)),
        scalar_curvature_R=float(scalar_curvature(system, x)),
    )
