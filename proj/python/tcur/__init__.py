"""Diffuse currents on the periodic space-time slab (0, 1) x T^d.

Fields are float64 arrays of shape (n_t, n) for d = 1 and (n_t, n, n) for d = 2;
vector fields and vertical current parts are lists of such arrays.
"""

import json

from ._core import (
    Grid,
    NumericalError,
    boundary,
    boundary_of_two_current,
    commands,
    commutator,
    commutator_sweep,
    flat_norm,
    horizontal_from_boundary,
    kernel_moment,
    mass,
    mollify,
    primitive_two_current,
    solve_continuity,
    straightening_defect,
    uniqueness_bounds,
    vertical_mass,
)
from ._core import run_experiment as _run_experiment


def run_experiment(command, config, seed=None, base_dir="."):
    """Run a harness command on a config dict; returns (report dict, passed)."""
    text, passed = _run_experiment(command, json.dumps(config), seed, str(base_dir))
    return json.loads(text), passed


__all__ = [
    "Grid",
    "NumericalError",
    "boundary",
    "boundary_of_two_current",
    "commands",
    "commutator",
    "commutator_sweep",
    "flat_norm",
    "horizontal_from_boundary",
    "kernel_moment",
    "mass",
    "mollify",
    "primitive_two_current",
    "run_experiment",
    "solve_continuity",
    "straightening_defect",
    "uniqueness_bounds",
    "vertical_mass",
]
