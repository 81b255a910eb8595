"""Mixed finite elements for the clamped biharmonic problem with weakly imposed
Dirichlet data and statically condensed biorthogonal auxiliary fields."""

from .mesh import Mesh, read_mesh, refine_uniform, shape_regularity, unit_square_mesh, write_mesh
from .fe_spaces import FeSpace, interpolate
from .dual_basis import build_dual_coeffs, eval_dual
from .assembly import BlockSystem, assemble_system, delta_h
from .solver import (
    Solution,
    condense,
    recover_secondary,
    solve_condensed,
    solve_full_saddle,
    solve_strong_bc,
    solve_weak_bc,
)
from .verification import energy_error, field_errors, get_case

__version__ = "0.1.0"
