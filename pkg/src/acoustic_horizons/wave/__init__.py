"""Finite-difference wave evolution on the polar annulus."""

from .grid import AnnularGrid
from .kernels import USE_NUMBA, backend_name
from .operators import FirstOrderOperator, cfl_dt, first_order_reduce
from .solver import (
    BoundaryMultipole,
    GaussianPulse,
    WaveOptions,
    WaveSolver,
    WaveState,
    boundary_h1_norm,
    run_scenario,
    trapping_metric,
)

__all__ = [
    "AnnularGrid",
    "USE_NUMBA",
    "backend_name",
    "FirstOrderOperator",
    "cfl_dt",
    "first_order_reduce",
    "BoundaryMultipole",
    "GaussianPulse",
    "WaveOptions",
    "WaveSolver",
    "WaveState",
    "boundary_h1_norm",
    "run_scenario",
    "trapping_metric",
]
