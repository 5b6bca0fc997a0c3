"""Controlled nonlocal vector fields and terminal costs.

A model bundles the control-affine vector field

    V(x, mu, u) = V^0(x, mu) + sum_j V^j(x, mu) u_j

with the data the solvers need: per-component Fourier coefficients, the
interaction kernels behind the measure derivative of each component, and
the terminal cost with its derivatives.  The concrete instance shipped
here is the mean-field Kuramoto model with the phase-synchronization cost;
`pointwise_model` adapts grid-sampled fields for other interaction laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .spectral import FourierField, RealGridField, rep_to_array, to_spectral

ControlVector = np.ndarray


# ---------------------------------------------------------------------------
# Admissible control sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleSet:
    """Compact convex control constraint: a Euclidean ball or a box."""

    kind: str
    m: int
    radius: float = 0.0
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "ball":
            if not self.radius > 0.0:
                raise ValueError("ball radius must be positive")
        elif self.kind == "box":
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.shape != (self.m,) or hi.shape != (self.m,):
                raise ValueError("box bounds must have length m")
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo <= hi)):
                raise ValueError("box bounds must be finite with lower <= upper")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            raise ValueError(f"unknown constraint kind {self.kind!r}")

    def contains(self, u: ControlVector, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            return False
        if self.kind == "ball":
            return float(np.dot(u, u)) <= self.radius**2 * (1.0 + tol) + tol
        return bool(np.all(u >= self.lower - tol) and np.all(u <= self.upper + tol))

    def project(self, u: ControlVector) -> ControlVector:
        """Euclidean projection; returns the input unchanged when feasible."""
        u = np.asarray(u, dtype=float)
        if self.kind == "ball":
            norm = float(np.linalg.norm(u))
            if norm <= self.radius:
                return u
            return u * (self.radius / norm)
        return np.clip(u, self.lower, self.upper)


def ball(radius: float, m: int = 2) -> AdmissibleSet:
    return AdmissibleSet("ball", m, radius=radius)


def box(lower, upper) -> AdmissibleSet:
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    return AdmissibleSet("box", lo.shape[0], lower=lower, upper=upper)


def admissible_project(u: ControlVector, admissible: AdmissibleSet) -> ControlVector:
    """Project a control vector onto the admissible set (idempotent)."""
    if not np.all(np.isfinite(np.asarray(u, dtype=float))):
        raise ValueError("control values must be finite")
    return admissible.project(u)


# ---------------------------------------------------------------------------
# Terminal cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostSpec:
    """Terminal cost with its flat (first-variation) and intrinsic derivatives.

    `flat` is normalized so its integral against mu vanishes; `dmu` must
    equal the spatial derivative of `flat`.
    """

    eval: Callable[[FourierField], float]
    dmu: Callable[[FourierField], FourierField]
    flat: Callable[[FourierField], FourierField]


def sync_cost_eval(mu: FourierField, x0: float) -> float:
    """Mean phase mismatch: integral of 1 - cos(x - x0) against mu."""
    center = mu.center
    mass = mu.coeffs[center]
    if abs(mass - 1.0 / (2.0 * np.pi)) > 1e-10:
        raise ValueError(f"density is not normalized: mode-0 coefficient {mass}")
    return 1.0 - 2.0 * np.pi * (np.exp(-1j * x0) * mu.coeffs[center - 1]).real


def sync_cost_dmu(mu: FourierField, x0: float) -> FourierField:
    """Intrinsic derivative of the mismatch cost: the field sin(x - x0)."""
    c = np.zeros(mu.n_modes + 1, dtype=complex)
    center = mu.center
    c[center + 1] = -0.5j * np.exp(-1j * x0)
    c[center - 1] = np.conj(c[center + 1])
    return FourierField(mu.n_modes, c)


def sync_cost_flat(mu: FourierField, x0: float) -> FourierField:
    """Flat derivative of the mismatch cost, normalized to zero mu-mean."""
    c = np.zeros(mu.n_modes + 1, dtype=complex)
    center = mu.center
    c[center] = 1.0 - sync_cost_eval(mu, x0)
    c[center + 1] = -0.5 * np.exp(-1j * x0)
    c[center - 1] = np.conj(c[center + 1])
    return FourierField(mu.n_modes, c)


def sync_cost_spec(x0: float) -> CostSpec:
    return CostSpec(
        eval=lambda mu: sync_cost_eval(mu, x0),
        dmu=lambda mu: sync_cost_dmu(mu, x0),
        flat=lambda mu: sync_cost_flat(mu, x0),
    )


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """Control-affine nonlocal vector field plus terminal cost.

    Attributes:
        m: control dimension.
        control_set: admissible set U.
        component_reps: (t, coeff array) -> tuple of m + 1 field
            representations (drift first, then one per control channel).
            A representation is either a {mode: coeff} dict or a dense
            coefficient array.
        total_rep: (t, coeff array, u) -> representation of the assembled
            field V^0 + sum_j u_j V^j.
        dmu_kernels: per-component convolution kernels k_j describing the
            measure derivative of V^j through D_mu V^j(y, mu, x) =
            k_j(y - x); None for components with no measure coupling.
        cost: terminal cost block.
        params: model constants, echoed into run artifacts.
    """

    m: int
    control_set: AdmissibleSet
    component_reps: Callable
    total_rep: Callable
    dmu_kernels: tuple
    cost: CostSpec
    params: Mapping = field(default_factory=dict)
    name: str = "model"

    def require_feasible(self, u: ControlVector) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if not self.control_set.contains(u):
            raise ValueError(f"control {u} outside the admissible set")
        return u

    def vector_field(self, t: float, mu: FourierField, u: ControlVector) -> FourierField:
        """Fourier coefficients of V(., mu, u) at time t."""
        u = self.require_feasible(u)
        rep = self.total_rep(t, mu.coeffs, u)
        return FourierField(mu.n_modes, rep_to_array(rep, mu.n_modes))

    def component_fields(self, t: float, mu: FourierField) -> tuple[FourierField, ...]:
        reps = self.component_reps(t, mu.coeffs)
        return tuple(FourierField(mu.n_modes, rep_to_array(r, mu.n_modes)) for r in reps)


# ---------------------------------------------------------------------------
# Kuramoto instance
# ---------------------------------------------------------------------------

def _kuramoto_interaction_coeff(a: np.ndarray, phase: complex) -> complex:
    # First harmonic of the order-parameter torque, i*pi*a_1*e^{i*alpha}.
    center = (a.shape[0] - 1) // 2
    return 1j * np.pi * a[center + 1] * phase


def kuramoto_model(alpha: float, x0: float, control_set: AdmissibleSet | None = None) -> ModelSpec:
    """Mean-field Kuramoto model with the phase-synchronization cost.

    The drift channel is the constant rotation V^1 = 1 and the coupling
    channel V^2(x, mu) = integral sin(y - x - alpha) dmu(y), whose only
    harmonics are n = +-1.  The default control set is the disk of radius
    sqrt(2).
    """
    if control_set is None:
        control_set = ball(np.sqrt(2.0), m=2)
    if control_set.m != 2:
        raise ValueError("the Kuramoto model has two control channels")
    phase = complex(np.exp(1j * alpha))

    def component_reps(t, a):
        v1 = _kuramoto_interaction_coeff(a, phase)
        return ({}, {0: 1.0 + 0.0j}, {1: v1, -1: v1.conjugate()})

    def total_rep(t, a, u):
        v1 = u[1] * _kuramoto_interaction_coeff(a, phase)
        return {0: complex(u[0]), 1: v1, -1: v1.conjugate()}

    # D_mu V^2(y, mu, x) = cos(y - x + alpha) = k(y - x) with k(z) = cos(z + alpha).
    kernel = {1: 0.5 * phase, -1: 0.5 * phase.conjugate()}
    return ModelSpec(
        m=2,
        control_set=control_set,
        component_reps=component_reps,
        total_rep=total_rep,
        dmu_kernels=(None, None, kernel),
        cost=sync_cost_spec(x0),
        params={"alpha": float(alpha), "x0": float(x0)},
        name="kuramoto",
    )


def kuramoto_vf_coeffs(
    t: float, mu: FourierField, u: ControlVector, *, alpha: float,
    control_set: AdmissibleSet | None = None,
) -> FourierField:
    """Assembled Kuramoto field: V_0 = u_1, V_1 = i*pi*u_2*mu_1*e^{i*alpha}."""
    model = kuramoto_model(alpha, x0=0.0, control_set=control_set)
    return model.vector_field(t, mu, u)


# ---------------------------------------------------------------------------
# Generic adapter
# ---------------------------------------------------------------------------

def pointwise_model(
    m: int,
    control_set: AdmissibleSet,
    component_values: Callable[[float, np.ndarray, FourierField], np.ndarray],
    cost: CostSpec,
    dmu_kernels: tuple | None = None,
    name: str = "pointwise",
) -> ModelSpec:
    """Wrap grid-sampled field components into a ModelSpec.

    `component_values(t, x, mu)` returns an (m + 1, len(x)) array of samples
    of V^0..V^m on the grid; they are transformed to coefficients on demand.
    Only models whose measure coupling is a convolution (given through
    `dmu_kernels`) support the adjoint solver.
    """
    if dmu_kernels is None:
        dmu_kernels = (None,) * (m + 1)

    def component_reps(t, a):
        n_modes = a.shape[0] - 1
        mu = FourierField(n_modes, a)
        x = 2.0 * np.pi * np.arange(n_modes) / n_modes
        samples = np.asarray(component_values(t, x, mu), dtype=float)
        if samples.shape != (m + 1, n_modes):
            raise ValueError(f"expected {(m + 1, n_modes)} samples, got {samples.shape}")
        return tuple(to_spectral(RealGridField(n_modes, row)).coeffs for row in samples)

    def total_rep(t, a, u):
        reps = component_reps(t, a)
        total = np.array(reps[0])
        for j in range(m):
            total += u[j] * reps[j + 1]
        return total

    return ModelSpec(
        m=m,
        control_set=control_set,
        component_reps=component_reps,
        total_rep=total_rep,
        dmu_kernels=tuple(dmu_kernels),
        cost=cost,
        name=name,
    )
