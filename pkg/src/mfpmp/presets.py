"""Named presets for the synchronization experiment."""

from __future__ import annotations

import numpy as np

from .spectral import FourierField, field_from_harmonics
from .timegrid import ControlSignal, TimeGrid, sampled_control


def fig1_density(n_modes: int) -> FourierField:
    """Initial density (2 + sin x + 0.8 cos 2x - 0.2 sin 2x) / (4*pi)."""
    return field_from_harmonics(n_modes, {
        0: 1.0 / (2.0 * np.pi),
        1: -0.125j / np.pi,
        2: (0.4 + 0.1j) / (4.0 * np.pi),
    })


def fig1_control(grid: TimeGrid) -> ControlSignal:
    """Initial control (sqrt(2) sin(2*pi*t), sqrt(2) cos(2*pi*t))."""
    r = np.sqrt(2.0)
    return sampled_control(
        grid, lambda t: (r * np.sin(2.0 * np.pi * t), r * np.cos(2.0 * np.pi * t))
    )


DENSITY_PRESETS = {"fig1": fig1_density}
CONTROL_PRESETS = {"fig1": fig1_control}
