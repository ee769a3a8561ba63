"""Uniform-grid trajectories carrying state, costate and control samples."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGrid, DimensionMismatch


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Trajectory:
    """Samples of x(t) (and optionally p(t), theta(t)) on a uniform grid.

    Parameters
    ----------
    times : (n,) array
        Uniformly spaced grid, n >= 2.  A zero-length interval (all nodes
        coincident) is allowed and treated as an empty integration range.
    states : (n, d) array
    costates, controls : (n, d) arrays, optional
    """

    times: np.ndarray
    states: np.ndarray
    costates: np.ndarray | None = None
    controls: np.ndarray | None = None

    def __post_init__(self):
        times = _frozen(self.times)
        states = _frozen(self.states)
        if times.ndim != 1 or times.size < 2:
            raise DegenerateGrid("trajectory needs at least 2 time nodes")
        if not np.all(np.isfinite(times)):
            raise DegenerateGrid("non-finite time values")
        diffs = np.diff(times)
        span = times[-1] - times[0]
        if span < 0:
            raise DegenerateGrid("time grid must be nondecreasing")
        if np.max(np.abs(diffs - diffs[0])) > 1e-12 * max(1.0, abs(span)):
            raise DegenerateGrid("time grid spacing is not uniform")
        if states.ndim != 2 or states.shape[0] != times.size:
            raise DimensionMismatch(
                f"states shape {states.shape} does not match {times.size} nodes")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        for name in ("costates", "controls"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = _frozen(arr)
            if arr.shape != states.shape:
                raise DimensionMismatch(
                    f"{name} shape {arr.shape} does not match states {states.shape}")
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return self.times.size

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def dt(self) -> float:
        return (self.times[-1] - self.times[0]) / (self.times.size - 1)

    def with_arrays(self, costates=None, controls=None) -> "Trajectory":
        """Copy of this trajectory with costate/control grids attached."""
        return Trajectory(self.times, self.states,
                          costates if costates is not None else self.costates,
                          controls if controls is not None else self.controls)


def uniform_grid(t0: float, tf: float, n_nodes: int) -> np.ndarray:
    """n_nodes uniformly spaced times on [t0, tf]."""
    if n_nodes < 2:
        raise DegenerateGrid("a grid needs at least 2 nodes")
    return np.linspace(float(t0), float(tf), int(n_nodes))


def grid_velocity(times: np.ndarray, states: np.ndarray) -> np.ndarray:
    """Discrete velocity: centered differences interiorly, one-sided at ends.

    A zero-length grid returns zeros (the velocity never enters any integral
    over an empty interval).
    """
    dt = (times[-1] - times[0]) / (times.size - 1)
    if dt == 0.0:
        return np.zeros_like(states)
    v = np.empty_like(states)
    v[0] = (states[1] - states[0]) / dt
    v[-1] = (states[-1] - states[-2]) / dt
    v[1:-1] = (states[2:] - states[:-2]) / (2.0 * dt)
    return v
