"""Phase-space transport solvers for wave speeds with jumps.

The package assembles sparse generators for the Liouville equation of
geometrical optics with transmission/reflection interface conditions,
integrates them classically (forward Euler / Crank-Nicolson) or through
the warped-phase unitary embedding, and extracts moment observables.
"""

from .assemble1d import SparseSystem, assemble_system_1d, rhs_direct_1d
from .assemble2d import SparseSystem2D, assemble_system_2d, rhs_direct_2d
from .engine import cfl_dt, integrate
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GridAlignmentError,
    LiouvoptError,
    MemoryBudgetError,
    StabilityError,
)
from .grids import (
    FieldSnapshot,
    PhaseMesh1D,
    PhaseMesh2D,
    PiecewiseSpeed1D,
    PiecewiseSpeed2D,
    build_mesh_1d,
    build_mesh_2d,
    discrete_delta,
    sample_speed_1d,
    sample_speed_2d,
)
from .interfaces import coeffs_1d, coeffs_2d, transmit_test_2d
from .observables import (
    density_1d,
    density_2d,
    exact_example1,
    exact_example2,
    levelset_moments,
    levelset_pair,
    ray_oracle_2d,
)
from .schrod import design_p_grid, extreme_eigs, run_pipeline, split_hermitian

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "FieldSnapshot",
    "GridAlignmentError",
    "LiouvoptError",
    "MemoryBudgetError",
    "PhaseMesh1D",
    "PhaseMesh2D",
    "PiecewiseSpeed1D",
    "PiecewiseSpeed2D",
    "SparseSystem",
    "SparseSystem2D",
    "StabilityError",
    "assemble_system_1d",
    "assemble_system_2d",
    "build_mesh_1d",
    "build_mesh_2d",
    "cfl_dt",
    "coeffs_1d",
    "coeffs_2d",
    "density_1d",
    "density_2d",
    "design_p_grid",
    "discrete_delta",
    "exact_example1",
    "exact_example2",
    "extreme_eigs",
    "integrate",
    "levelset_moments",
    "levelset_pair",
    "ray_oracle_2d",
    "rhs_direct_1d",
    "rhs_direct_2d",
    "run_pipeline",
    "sample_speed_1d",
    "sample_speed_2d",
    "split_hermitian",
    "transmit_test_2d",
]
