"""Independent oracles for the solver chain, reported as JSON-ready dicts.

Three cross-checks back the solver stack:

* a finite oscillator ensemble integrated with its own RK4 march, compared
  against the spectral solution through trigonometric moments and cost;
* a finite-difference probe of the first-order cost expansion: the decrease
  predicted through the adjoint pairing must match actual forward solves to
  first order in the step, with a second-order residual;
* the measure-independent (pure rotation) case, where the co-density has a
  closed form along characteristics.
"""

from __future__ import annotations

import numpy as np

from .adjoint import integrate_backward
from .descent import non_extremality, switching_function, target_control
from .forward import cost_of_control, integrate_forward
from .models import ModelSpec, ball, kuramoto_model
from .particles import particle_cost, simulate_particles, stratified_ensemble
from .spectral import FourierField, reconstruct_rows, grid_points
from .timegrid import ControlSignal, TimeGrid


def meanfield_vs_particles(rho0: FourierField, u: ControlSignal, model: ModelSpec,
                           grid: TimeGrid, n_particles: int) -> dict:
    """Compare the spectral solution with a stratified particle run.

    Both systems see the identical control.  Reports the largest mismatch
    of the first two trigonometric moments at t in {0, T/2, T} (T/2 rounded
    down to a full node) and the terminal cost gap.
    """
    alpha = float(model.params.get("alpha", 0.0))
    x0 = float(model.params.get("x0", 0.0))
    traj = integrate_forward(rho0, u, model, grid)
    tau = grid.tau
    check_nodes = sorted({0, grid.n_steps // 2, grid.n_steps})
    times = [k * tau for k in check_nodes]

    ensemble0 = stratified_ensemble(rho0, n_particles)
    terminal, snaps = simulate_particles(ensemble0, u, alpha, grid, record_times=times)

    per_time = {}
    worst = 0.0
    center = traj.n_modes // 2
    for k, t in zip(check_nodes, times):
        a = traj.coeffs[2 * k]
        phases = snaps[t]
        entry = {}
        for n in (1, 2):
            moment = np.mean(np.exp(1j * n * phases))
            spectral = 2.0 * np.pi * np.conj(a[center + n])
            gap = abs(moment - spectral)
            entry[f"moment_{n}"] = gap
            worst = max(worst, gap)
        per_time[f"t={t:g}"] = entry

    mf_cost = model.cost.eval(traj.terminal_field())
    pc_cost = particle_cost(terminal, x0)
    return {
        "n_particles": n_particles,
        "moment_discrepancy": worst,
        "per_time": per_time,
        "meanfield_cost": mf_cost,
        "particle_cost": pc_cost,
        "cost_gap": abs(mf_cost - pc_cost),
    }


def increment_slope_check(rho0: FourierField, u: ControlSignal, ubar: ControlSignal,
                          model: ModelSpec, grid: TimeGrid, lambdas) -> dict:
    """Probe the first-order cost expansion along u + lam * (ubar - u).

    The adjoint route predicts cost(u^lam) - cost(u) = -lam * S with
    S = <ubar - u, d>; actual differences come from fresh forward solves.
    Reports per-lambda ratios actual/predicted and the log-log slope of the
    residual, which must approach 2.
    """
    lambdas = [float(l) for l in lambdas]
    if any(l <= 0 or l > 1 for l in lambdas):
        raise ValueError("lambdas must lie in (0, 1]")
    traj = integrate_forward(rho0, u, model, grid)
    cost_u = model.cost.eval(traj.terminal_field())
    cotraj = integrate_backward(traj, u, model)
    d = switching_function(traj, cotraj, model)
    slope = non_extremality(u, ubar, d)

    ratios = []
    residuals = []
    for lam in lambdas:
        actual = cost_of_control(rho0, u.toward(ubar, lam), model, grid) - cost_u
        predicted = -lam * slope
        ratios.append(actual / predicted if predicted != 0.0 else np.nan)
        residuals.append(abs(actual - predicted))

    logs = np.log(np.maximum(residuals, 1e-300))
    order = float(np.polyfit(np.log(lambdas), logs, 1)[0]) if len(lambdas) >= 2 else np.nan
    return {
        "lambdas": lambdas,
        "predicted_slope": slope,
        "ratios": ratios,
        "residuals": residuals,
        "residual_order": order,
    }


def local_adjoint_check(u1_values, rho0: FourierField, x0: float, grid: TimeGrid) -> dict:
    """Closed-form co-density check for the measure-independent case.

    With the coupling channel off (u_2 = 0) the field is a rigid rotation
    and the co-density factorizes as

        zeta_t(x) = -sin(x + s(t) - x0) * rho_0(x - c(t)),

    where s(t) is the remaining rotation integral of u_1 and c(t) the
    accumulated one (both exact for piecewise-constant controls).  Reports
    the largest pointwise gap between the solved and analytic co-densities
    over all full-step nodes and grid points.
    """
    u1 = np.asarray(u1_values, dtype=float)
    if u1.shape != (grid.n_steps + 1,):
        raise ValueError(f"u1 profile must have {grid.n_steps + 1} node values")
    u = ControlSignal(grid, np.column_stack([u1, np.zeros_like(u1)]))
    radius = float(np.max(np.abs(u1))) + 1.0
    model = kuramoto_model(alpha=0.0, x0=x0, control_set=ball(radius))
    traj = integrate_forward(rho0, u, model, grid)
    cotraj = integrate_backward(traj, u, model)

    # Remaining and accumulated rotation per half node, exact for the
    # piecewise-constant control class.
    n_half = 2 * grid.n_steps
    h = 0.5 * grid.tau
    remaining = np.zeros(n_half + 1)
    for s in range(n_half - 1, -1, -1):
        remaining[s] = remaining[s + 1] + h * u1[s >> 1]
    accumulated = remaining[0] - remaining

    nodes = np.arange(0, n_half + 1, 2)
    x = grid_points(rho0.n_modes)
    modes = np.arange(-rho0.center, rho0.center + 1)
    shifted = rho0.coeffs[None, :] * np.exp(-1j * np.outer(accumulated[nodes], modes))
    rho_t = reconstruct_rows(shifted)
    analytic = -np.sin(x[None, :] + remaining[nodes, None] - x0) * rho_t
    solved = reconstruct_rows(cotraj.coeffs[nodes])
    err = float(np.max(np.abs(solved - analytic)))
    return {"max_error": err, "n_modes": rho0.n_modes, "tau": grid.tau}


def synthetic_control_pairs(grid: TimeGrid, control_set, count: int = 2):
    """Deterministic feasible (reference, target) pairs for slope probes."""
    t = grid.full_times()
    pairs = []
    recipes = [
        (lambda t: np.column_stack([0.4 * np.sin(t), 0.3 * np.cos(2.0 * t)]),
         lambda t: np.column_stack([0.7 * np.cos(t), -0.5 * np.sin(t)])),
        (lambda t: np.column_stack([0.2 + 0.0 * t, -0.3 + 0.0 * t]),
         lambda t: np.column_stack([-0.6 * np.cos(3.0 * t), 0.5 + 0.0 * t])),
        (lambda t: np.column_stack([0.5 * np.sin(2.0 * t), 0.1 + 0.0 * t]),
         lambda t: np.column_stack([0.2 + 0.0 * t, 0.6 * np.sin(t)])),
    ]
    for ref_fn, tgt_fn in recipes[:count]:
        ref = np.stack([control_set.project(row) for row in ref_fn(t)])
        tgt = np.stack([control_set.project(row) for row in tgt_fn(t)])
        pairs.append((ControlSignal(grid, ref), ControlSignal(grid, tgt)))
    return pairs


def fig1_slope_pair(rho0: FourierField, u0: ControlSignal, model: ModelSpec,
                    grid: TimeGrid):
    """The (initial control, its target control) pair of the experiment."""
    traj = integrate_forward(rho0, u0, model, grid)
    cotraj = integrate_backward(traj, u0, model)
    d = switching_function(traj, cotraj, model)
    return u0, target_control(d, model.control_set, u0)
