"""Time lattices and time-indexed containers shared by the solvers.

Controls are piecewise constant per full step: u(t) = u_k on
[k*tau, (k+1)*tau).  State trajectories are stored at every half-step node
t = s*tau/2 so the backward pass can read forward states at its stage
times without interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import FourierField


@dataclass(frozen=True)
class TimeGrid:
    """Uniform lattice on [0, T] with step tau; T/tau must be an integer."""

    T: float
    tau: float

    def __post_init__(self):
        if not (self.T > 0.0 and self.tau > 0.0):
            raise ValueError("T and tau must be positive")
        steps = self.T / self.tau
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"T/tau = {steps} is not an integer")

    @property
    def n_steps(self) -> int:
        """Number K of full steps; there are K + 1 full nodes and 2K + 1 half nodes."""
        return int(round(self.T / self.tau))

    def full_times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.tau

    def half_times(self) -> np.ndarray:
        return np.arange(2 * self.n_steps + 1) * (0.5 * self.tau)


@dataclass(frozen=True)
class Trajectory:
    """Coefficient snapshots on the half-step lattice.

    `coeffs[s]` holds the field at t = s * stride * tau/2.  Full-rate
    storage (stride 1) is required by the backward solver; larger strides
    are a memory escape hatch for forward-only diagnostics.
    """

    grid: TimeGrid
    coeffs: np.ndarray
    stride: int = 1

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.ndim != 2 or c.shape[1] % 2 != 1:
            raise ValueError("coeffs must be a (snapshots, n_modes + 1) array")
        total = 2 * self.grid.n_steps
        if self.stride < 1 or total % self.stride != 0:
            raise ValueError(f"stride {self.stride} must divide {total}")
        expected = total // self.stride + 1
        if c.shape[0] != expected:
            raise ValueError(f"expected {expected} snapshots, got {c.shape[0]}")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def n_snapshots(self) -> int:
        return self.coeffs.shape[0]

    def times(self) -> np.ndarray:
        return np.arange(self.n_snapshots) * (0.5 * self.tau_effective)

    @property
    def tau_effective(self) -> float:
        return self.grid.tau * self.stride

    def field(self, index: int) -> FourierField:
        return FourierField(self.n_modes, self.coeffs[index])

    def terminal_field(self) -> FourierField:
        return self.field(self.n_snapshots - 1)

    def node_index(self, t: float) -> int:
        """Snapshot index closest to time t."""
        h = 0.5 * self.grid.tau * self.stride
        idx = int(round(t / h))
        if idx < 0 or idx >= self.n_snapshots or abs(idx * h - t) > 0.5 * h + 1e-12:
            raise ValueError(f"time {t} outside the stored lattice")
        return idx


@dataclass(frozen=True)
class ControlSignal:
    """Control values at full-step nodes, held constant over each step.

    The value at node K (= T) never drives the dynamics; it is kept so
    presets and dumps cover the closed interval.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.grid.n_steps + 1:
            raise ValueError(
                f"expected {self.grid.n_steps + 1} control nodes, got {v.shape[0]}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("control values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def toward(self, other: "ControlSignal", lam: float) -> "ControlSignal":
        """Convex combination u + lam * (other - u)."""
        if other.grid != self.grid:
            raise ValueError("control signals live on different grids")
        return ControlSignal(self.grid, self.values + lam * (other.values - self.values))


def constant_control(grid: TimeGrid, value) -> ControlSignal:
    v = np.atleast_1d(np.asarray(value, dtype=float))
    return ControlSignal(grid, np.tile(v, (grid.n_steps + 1, 1)))


def sampled_control(grid: TimeGrid, profile) -> ControlSignal:
    """Sample a callable t -> control vector at the full-step nodes."""
    rows = [np.atleast_1d(np.asarray(profile(t), dtype=float)) for t in grid.full_times()]
    return ControlSignal(grid, np.stack(rows))
