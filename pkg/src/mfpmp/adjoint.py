"""Backward integration of the adjoint nonlocal balance law in Fourier space.

The adjoint state is a signed-measure density zeta with coefficients b_n
driven backward from t = T by

    d b_n / dt = -i*n*(v b)_n  -  ((dv/dx) b)_n  -  (q a)_n,

where v is the assembled vector field along the stored forward trajectory,
the middle term stretches the co-density by the velocity gradient, and the
nonlocal source q(x) = integral D_mu V(y, mu, u, x) dnu(y) is built from the
model's interaction kernels.  Both source pieces enter with a minus sign;
that is what the weak duality identity dictates, and it is what makes the
total co-mass constant in time for translation-equivariant fields (a rigid
phase shift commutes with such flows, so the sensitivity of the terminal
cost to a shift cannot depend on when the shift is applied).  The terminal
condition pairs the cost's intrinsic derivative with the terminal density:

    zeta_T = -D_mu l(mu_T) * rho_T.

Unlike the density, the co-density conserves no mass: the n = 0 source is
generally nonzero.

The march runs at the same half step as the forward solver, so every stage
reads a forward state either straight from storage or, for quarter-step
stage times, from a single local RK4 quarter-step off the stored node
(fourth-order consistent, no interpolation).
"""

from __future__ import annotations

import numpy as np

from .forward import _check_bounded, _mode_numbers, _rk4_forward_step
from .models import ModelSpec
from .spectral import FourierField, apply_product, rep_derivative, require_hermitian
from .timegrid import ControlSignal, Trajectory


def _source_field_rep(model: ModelSpec, u: np.ndarray, b: np.ndarray):
    """Representation of q(x) = integral D_mu V(y, mu, u, x) dnu(y).

    Component j contributes u_j * (flip(k_j) * nu)(x), whose coefficients are
    2*pi * k_j[-n] * b_n; the drift component enters with unit weight.
    """
    weights = (1.0,) + tuple(u)
    dense = None
    modes: dict[int, complex] = {}
    for w, kernel in zip(weights, model.dmu_kernels):
        if kernel is None or w == 0.0:
            continue
        if isinstance(kernel, dict):
            center = (b.shape[0] - 1) // 2
            for mk, vk in kernel.items():
                n = -mk
                modes[n] = modes.get(n, 0.0) + w * 2.0 * np.pi * vk * b[center + n]
        else:
            if dense is None:
                dense = np.zeros_like(b)
            dense += w * 2.0 * np.pi * np.asarray(kernel)[::-1] * b
    if dense is not None:
        if modes:
            center = (b.shape[0] - 1) // 2
            for n, v in modes.items():
                dense[center + n] += v
        return dense
    return modes if modes else None


def _adjoint_rhs(t: float, b: np.ndarray, a: np.ndarray, u: np.ndarray,
                 model: ModelSpec, mode_arr: np.ndarray) -> np.ndarray:
    v_rep = model.total_rep(t, a, u)
    out = -1j * mode_arr * apply_product(v_rep, b)
    out -= apply_product(rep_derivative(v_rep), b)
    q_rep = _source_field_rep(model, u, b)
    if q_rep is not None:
        out -= apply_product(q_rep, a)
    return out


def _rk4_backward_step(b: np.ndarray, t_hi: float, h: float, u: np.ndarray,
                       a_hi: np.ndarray, a_mid: np.ndarray, a_lo: np.ndarray,
                       model: ModelSpec, mode_arr: np.ndarray) -> np.ndarray:
    hb = -h
    k1 = _adjoint_rhs(t_hi, b, a_hi, u, model, mode_arr)
    k2 = _adjoint_rhs(t_hi + 0.5 * hb, b + (0.5 * hb) * k1, a_mid, u, model, mode_arr)
    k3 = _adjoint_rhs(t_hi + 0.5 * hb, b + (0.5 * hb) * k2, a_mid, u, model, mode_arr)
    k4 = _adjoint_rhs(t_hi + hb, b + hb * k3, a_lo, u, model, mode_arr)
    return b + (hb / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def terminal_adjoint(muT: FourierField, model: ModelSpec) -> FourierField:
    """Terminal co-density: the product (-D_mu l(mu_T)) * rho_T.

    For the synchronization cost this reduces to
    b_n(T) = (i/2) * (a_{n-1} e^{-i x0} - a_{n+1} e^{i x0}).
    """
    require_hermitian(muT, 1e-10)
    neg_dmu = -model.cost.dmu(muT).coeffs
    return FourierField(muT.n_modes, apply_product(neg_dmu, muT.coeffs))


def rhs_adjoint(t: float, b: FourierField, a: FourierField, u,
                model: ModelSpec) -> FourierField:
    """Coefficient time derivative of the co-density at forward state a."""
    u = model.require_feasible(u)
    if b.n_modes != a.n_modes:
        raise ValueError("state and co-state mode counts differ")
    mode_arr = _mode_numbers(b.coeffs.shape[0])
    return FourierField(b.n_modes, _adjoint_rhs(t, b.coeffs, a.coeffs, u, model, mode_arr))


def integrate_backward(traj: Trajectory, u: ControlSignal, model: ModelSpec,
                       terminal: FourierField | None = None) -> Trajectory:
    """Solve the adjoint system backward along a stored forward trajectory.

    Args:
        traj: full-rate (stride 1) forward trajectory.
        u: the control that produced `traj`.
        model: vector-field specification.
        terminal: optional override of the terminal co-density; defaults to
            the cost-derived condition.  Linearity in this argument is a
            tested property of the system.

    Returns:
        Co-trajectory on the same half-step lattice.
    """
    if traj.stride != 1:
        raise ValueError("the adjoint solver needs a full-rate forward trajectory")
    if u.grid != traj.grid:
        raise ValueError("control signal grid does not match the trajectory")
    grid = traj.grid
    for row in u.values:
        model.require_feasible(row)
    if terminal is None:
        terminal = terminal_adjoint(traj.terminal_field(), model)
    if terminal.n_modes != traj.n_modes:
        raise ValueError("terminal co-density resolution does not match the trajectory")

    h = 0.5 * grid.tau
    mode_arr = _mode_numbers(traj.n_modes + 1)
    out = np.empty_like(traj.coeffs)
    b = np.array(terminal.coeffs, dtype=complex)
    last = 2 * grid.n_steps
    out[last] = b
    for s in range(last, 0, -1):
        uk = u.values[(s - 1) >> 1]
        a_hi = traj.coeffs[s]
        a_lo = traj.coeffs[s - 1]
        a_mid = _rk4_forward_step(a_lo, (s - 1) * h, 0.5 * h, uk, model, mode_arr)
        b = _rk4_backward_step(b, s * h, h, uk, a_hi, a_mid, a_lo, model, mode_arr)
        _check_bounded(b, (s - 1) * h)
        out[s - 1] = b
    return Trajectory(grid, out, stride=1)
