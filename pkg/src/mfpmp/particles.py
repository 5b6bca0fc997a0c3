"""Finite Kuramoto ensembles: the independent oracle for the mean-field solver.

The N-oscillator system

    dx_i/dt = u_1 + u_2 * (1/N) * sum_j sin(x_j - x_i - alpha)

is integrated with the same fixed-step RK4 and the same piecewise-constant
control sampling as the spectral solver.  The pairwise sum includes the
j = i term (it contributes sin(-alpha), which vanishes in the experiments
with alpha = 0) and is evaluated through the order parameter
Z = (1/N) sum_j exp(i x_j) in O(N) per stage.

Ensembles are initialized deterministically by inverse-CDF sampling of the
initial density at the midpoint quantiles (i - 1/2)/N, so oracle runs are
reproducible without seed management.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError
from .spectral import FourierField
from .timegrid import ControlSignal, TimeGrid

_PHASE_DRIFT_LIMIT = 1e8


@dataclass(frozen=True)
class ParticleEnsemble:
    """Oscillator phases in radians (unwrapped during integration)."""

    phases: np.ndarray

    def __post_init__(self):
        p = np.array(self.phases, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("phases must be a nonempty 1-D array")
        if not np.all(np.isfinite(p)):
            raise ValueError("phases must be finite")
        p.flags.writeable = False
        object.__setattr__(self, "phases", p)

    @property
    def n(self) -> int:
        return self.phases.size

    def wrapped(self) -> np.ndarray:
        return np.mod(self.phases, 2.0 * np.pi)


def _phase_rhs(x: np.ndarray, u: np.ndarray, alpha: float) -> np.ndarray:
    z = np.mean(np.exp(1j * x))
    return u[0] + u[1] * np.imag(np.exp(-1j * (x + alpha)) * z)


def simulate_particles(initial: ParticleEnsemble, u: ControlSignal, alpha: float,
                       grid: TimeGrid, record_times=None):
    """March the oscillator ODE with RK4 at the full control step.

    Args:
        record_times: optional times (on the full-step lattice) at which to
            capture phase snapshots.

    Returns:
        The terminal ensemble, or (terminal, {time: phases}) when
        `record_times` is given.
    """
    tau = grid.tau
    x = np.array(initial.phases, dtype=float)
    snapshots = {}
    want = {}
    if record_times is not None:
        for t in record_times:
            k = int(round(t / tau))
            if abs(k * tau - t) > 1e-9 or k < 0 or k > grid.n_steps:
                raise ValueError(f"record time {t} is not a full-step node")
            want[k] = float(t)
    if 0 in want:
        snapshots[want[0]] = x.copy()
    for k in range(grid.n_steps):
        uk = u.values[k]
        t = k * tau
        k1 = _phase_rhs(x, uk, alpha)
        k2 = _phase_rhs(x + 0.5 * tau * k1, uk, alpha)
        k3 = _phase_rhs(x + 0.5 * tau * k2, uk, alpha)
        k4 = _phase_rhs(x + tau * k3, uk, alpha)
        x = x + (tau / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        peak = float(np.max(np.abs(x)))
        if not peak <= _PHASE_DRIFT_LIMIT:
            raise DivergenceError(f"particle phases drifted to {peak:.3e} at t = {t + tau:.6g}")
        if k + 1 in want:
            snapshots[want[k + 1]] = x.copy()
    terminal = ParticleEnsemble(x)
    if record_times is not None:
        return terminal, snapshots
    return terminal


def empirical_moment(ensemble: ParticleEnsemble, n: int) -> complex:
    """Trigonometric moment (1/N) sum_i exp(i n x_i)."""
    return complex(np.mean(np.exp(1j * n * ensemble.phases)))


def particle_cost(ensemble: ParticleEnsemble, x0: float) -> float:
    """Ensemble average of 1 - cos(x - x0)."""
    return float(np.mean(1.0 - np.cos(ensemble.phases - x0)))


def density_cdf_values(rho0: FourierField, x: np.ndarray) -> np.ndarray:
    """Cumulative integral of the density from 0 to x, via its harmonics."""
    center = rho0.center
    c = rho0.coeffs
    out = c[center].real * x
    for n in range(1, center + 1):
        cn = c[center + n]
        if cn == 0:
            continue
        # 2*Re[c_n(exp(inx) - 1)/(in)] collects the +-n pair of a real field.
        out = out + 2.0 * ((cn * (np.exp(1j * n * x) - 1.0)) / (1j * n)).real
    return out


def stratified_ensemble(rho0: FourierField, n_particles: int) -> ParticleEnsemble:
    """Deterministic inverse-CDF sample of rho0 at midpoint quantiles.

    Particle i sits at the (i - 1/2)/N quantile.  The density must be
    normalized and nonnegative enough for its CDF to be monotone.
    """
    if n_particles < 1:
        raise ValueError("need at least one particle")
    mass = rho0.coeffs[rho0.center].real * 2.0 * np.pi
    if abs(mass - 1.0) > 1e-10:
        raise ValueError(f"density mass {mass} is not 1")
    q = (np.arange(n_particles) + 0.5) / n_particles
    lo = np.zeros(n_particles)
    hi = np.full(n_particles, 2.0 * np.pi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = density_cdf_values(rho0, mid) < q
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return ParticleEnsemble(0.5 * (lo + hi))
