"""Adjoint-based descent over controls with backtracking line search.

One outer iteration runs: forward solve, backward adjoint solve, switching
function d(t) (the pairing of each control channel's field with the
co-density), pointwise maximization of v . d(t) over the admissible set to
get the target control, the non-extremality value

    E[u] = <target - u, d>_{L2}  >=  0,

and a backtracking search over convex steps toward the target that accepts
the largest theta^j satisfying the sufficient-decrease test

    cost(u + theta^j (target - u)) - cost(u) <= -c * theta^j * E[u].

E[u] = 0 characterizes controls satisfying the pointwise maximum condition,
so it doubles as the convergence measure; the accepted step size gives the
stopping rule used in the experiments.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .adjoint import integrate_backward
from .forward import cost_of_control, integrate_forward
from .models import ModelSpec
from .spectral import FourierField, rep_pairing
from .timegrid import ControlSignal, TimeGrid, Trajectory

# Ball directions shorter than this are treated as ties (current control kept).
_TIE_NORM = 1e-14

STATUS_EXTREMAL = "non-extremality-converged"
STATUS_STEP = "step-size-converged"
STATUS_MAX_ITER = "max-iterations"
STATUS_LINE_SEARCH = "line-search-failed"


@dataclass(frozen=True)
class SwitchingFunction:
    """Per-node coefficients d(t) of the cost's linear response to the control."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.n_steps + 1:
            raise ValueError("switching values must be (n_nodes, m)")
        if not np.all(np.isfinite(v)):
            raise ValueError("switching values must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class DescentConfig:
    """Backtracking and stopping parameters.

    c and theta live in (0, 1); lambda_tol is the accepted-step stopping
    threshold, eps_tol the non-extremality stopping threshold, j_max the
    deepest backtracking exponent, k_max the outer iteration cap.

    lambda_patience is the number of consecutive below-threshold steps
    required before the step-size rule terminates the run.  Accepted step
    sizes oscillate strongly along curved valleys (the target control lives
    on the constraint boundary, so iterates zigzag), and a single tiny step
    is routinely followed by full-length ones; a patience of 1 reproduces
    the raw stop-at-first-small-step rule.
    """

    c: float = 0.01
    theta: float = 0.5
    lambda_tol: float = 1e-2
    j_max: int = 40
    k_max: int = 200
    eps_tol: float = 1e-8
    lambda_patience: int = 3

    def __post_init__(self):
        if not (0.0 < self.c < 1.0 and 0.0 < self.theta < 1.0):
            raise ValueError("c and theta must lie in (0, 1)")
        if self.lambda_tol < 0 or self.eps_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.j_max < 0 or self.k_max < 1:
            raise ValueError("j_max must be >= 0 and k_max >= 1")
        if self.lambda_patience < 1:
            raise ValueError("lambda_patience must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    cost: float
    non_extremality: float
    lam: float
    backtrack_count: int
    wall_time: float


@dataclass(frozen=True)
class DescentResult:
    u_final: ControlSignal
    history: tuple
    status: str
    final_cost: float

    @property
    def iterations(self) -> int:
        return len(self.history)


def switching_function(traj: Trajectory, cotraj: Trajectory,
                       model: ModelSpec) -> SwitchingFunction:
    """Pair each control channel's field with the co-density at full nodes.

    d_j(t_k) = integral V^j(x, mu_{t_k}) zeta_{t_k}(x) dx.
    """
    if traj.grid != cotraj.grid or traj.stride != 1 or cotraj.stride != 1:
        raise ValueError("trajectories must share a full-rate grid")
    if traj.n_modes != cotraj.n_modes:
        raise ValueError("trajectory resolutions differ")
    grid = traj.grid
    n_nodes = grid.n_steps + 1
    vals = np.empty((n_nodes, model.m))
    for k in range(n_nodes):
        s = 2 * k
        a = traj.coeffs[s]
        b = cotraj.coeffs[s]
        reps = model.component_reps(k * grid.tau, a)
        for j in range(model.m):
            vals[k, j] = rep_pairing(reps[j + 1], b)
    return SwitchingFunction(grid, vals)


def target_control(d: SwitchingFunction, admissible, u: ControlSignal) -> ControlSignal:
    """Pointwise maximizer of v . d(t) over the admissible set.

    Ball: radius * d/|d|.  Box: the bound selected by the sign of each
    component.  Where the direction vanishes every point maximizes, and the
    current control value is kept (ties contribute nothing to the
    non-extremality integral and avoid spurious direction changes).
    """
    if d.grid != u.grid:
        raise ValueError("switching function and control live on different grids")
    dv = d.values
    out = np.array(u.values, dtype=float)
    if admissible.kind == "ball":
        norms = np.linalg.norm(dv, axis=1)
        active = norms > _TIE_NORM
        out[active] = dv[active] * (admissible.radius / norms[active])[:, None]
    else:
        pos = dv > 0.0
        neg = dv < 0.0
        upper = np.broadcast_to(admissible.upper, dv.shape)
        lower = np.broadcast_to(admissible.lower, dv.shape)
        out[pos] = upper[pos]
        out[neg] = lower[neg]
    return ControlSignal(u.grid, out)


def _inner_l2(a: np.ndarray, b: np.ndarray, tau: float) -> float:
    # Rectangle rule over the K control steps; the node at t = T carries no
    # weight because controls are constant on [t_k, t_{k+1}).
    return float(tau * np.sum(a[:-1] * b[:-1]))


def non_extremality(u: ControlSignal, ubar: ControlSignal, d: SwitchingFunction) -> float:
    """L2 pairing <ubar - u, d>; nonnegative whenever ubar is the target."""
    if u.grid != ubar.grid or u.grid != d.grid:
        raise ValueError("grids differ")
    return _inner_l2(ubar.values - u.values, d.values, u.grid.tau)


def backtracking_step(u: ControlSignal, ubar: ControlSignal, d: SwitchingFunction,
                      cost_u: float, cfg: DescentConfig, evaluator):
    """Largest theta^j (smallest j) passing the sufficient-decrease test.

    `evaluator` maps a trial control to its cost via a fresh forward solve.
    Returns (lam, new_cost, j, accepted); lam = 0 with accepted = False when
    no exponent up to j_max qualifies.
    """
    slope = _inner_l2(u.values - ubar.values, d.values, u.grid.tau)  # = -E[u]
    lam = 1.0
    for j in range(cfg.j_max + 1):
        trial = u.toward(ubar, lam)
        trial_cost = evaluator(trial)
        if trial_cost - cost_u <= cfg.c * lam * slope:
            return lam, trial_cost, j, True
        lam *= cfg.theta
    return 0.0, cost_u, cfg.j_max + 1, False


def _project_signal(u: ControlSignal, admissible) -> ControlSignal:
    out = np.array(u.values, dtype=float)
    for i in range(out.shape[0]):
        out[i] = admissible.project(out[i])
    return ControlSignal(u.grid, out)


def run_descent(rho0: FourierField, u0: ControlSignal, model: ModelSpec,
                grid: TimeGrid, cfg: DescentConfig,
                progress=None) -> DescentResult:
    """Outer descent loop.

    Per iteration: forward solve, adjoint solve, switching function, target
    control, non-extremality, backtracking, convex update (re-projected to
    absorb round-off).  Stops when the non-extremality drops below eps_tol,
    when the accepted step has stayed below lambda_tol for lambda_patience
    consecutive iterations, on k_max, or on a failed line search.  The
    recorded costs are non-increasing.

    Args:
        progress: optional callable receiving each IterationRecord.
    """
    u = _project_signal(u0, model.control_set)
    history: list[IterationRecord] = []
    status = STATUS_MAX_ITER
    final_cost = None
    small_steps = 0

    def evaluator(trial: ControlSignal) -> float:
        return cost_of_control(rho0, trial, model, grid)

    for k in range(cfg.k_max):
        t0 = time.perf_counter()
        traj = integrate_forward(rho0, u, model, grid)
        cost = model.cost.eval(traj.terminal_field())
        if final_cost is None:
            final_cost = cost
        cotraj = integrate_backward(traj, u, model)
        d = switching_function(traj, cotraj, model)
        ubar = target_control(d, model.control_set, u)
        energy = non_extremality(u, ubar, d)

        if energy < cfg.eps_tol:
            record = IterationRecord(k, cost, energy, 0.0, 0, time.perf_counter() - t0)
            history.append(record)
            if progress is not None:
                progress(record)
            status = STATUS_EXTREMAL
            final_cost = cost
            break

        lam, new_cost, j, accepted = backtracking_step(u, ubar, d, cost, cfg, evaluator)
        record = IterationRecord(k, cost, energy, lam, j, time.perf_counter() - t0)
        history.append(record)
        if progress is not None:
            progress(record)

        if not accepted:
            status = STATUS_LINE_SEARCH
            final_cost = cost
            break

        u = _project_signal(u.toward(ubar, lam), model.control_set)
        final_cost = new_cost
        small_steps = small_steps + 1 if lam < cfg.lambda_tol else 0
        if small_steps >= cfg.lambda_patience:
            status = STATUS_STEP
            break

    return DescentResult(u, tuple(history), status, float(final_cost))
