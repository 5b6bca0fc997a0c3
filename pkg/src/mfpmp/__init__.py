"""Indirect descent solver for optimal control of nonlocal transport on the circle.

The package couples a pseudospectral forward solver for the controlled
continuity equation, a backward solver for the adjoint balance law, and a
maximum-condition descent loop with backtracking, validated against
particle, finite-difference, and closed-form oracles.
"""

from .adjoint import integrate_backward, rhs_adjoint, terminal_adjoint
from .descent import (
    DescentConfig,
    DescentResult,
    IterationRecord,
    SwitchingFunction,
    backtracking_step,
    non_extremality,
    run_descent,
    switching_function,
    target_control,
)
from .errors import ConfigError, DivergenceError, LineSearchFailure, ValidationFailure
from .forward import (
    cost_of_control,
    density_min,
    integrate_forward,
    rhs_continuity,
    terminal_state,
)
from .models import (
    AdmissibleSet,
    CostSpec,
    ModelSpec,
    admissible_project,
    ball,
    box,
    kuramoto_model,
    kuramoto_vf_coeffs,
    pointwise_model,
    sync_cost_dmu,
    sync_cost_eval,
    sync_cost_flat,
)
from .particles import (
    ParticleEnsemble,
    empirical_moment,
    particle_cost,
    simulate_particles,
    stratified_ensemble,
)
from .presets import fig1_control, fig1_density
from .spectral import (
    FourierField,
    RealGridField,
    convolve,
    derivative,
    field_from_harmonics,
    hermitian_defect,
    pairing,
    pointwise_product,
    to_physical,
    to_spectral,
)
from .timegrid import ControlSignal, TimeGrid, Trajectory, constant_control, sampled_control

__version__ = "0.1.0"
