"""Shell-FEA toolkit for flat and triangulated strain-limiting layers of soft grippers."""

__version__ = "0.1.0"

from .errors import (ConvergenceError, InvalidInputError, MeshingError, SolverError,
                     StructuralMechanismError, TrlsimError)
from .materials import PA6, PLA, ECOFLEX_00_30, Material, calibrate_modulus
from .geometry import SllSpec, TrlSpec, TriMesh, build_mesh, validate_mesh, export_stl
from .fea import LoadCase, assemble, solve, solve_many, converge, converge_many

__all__ = [
    "__version__",
    "TrlsimError", "InvalidInputError", "MeshingError", "SolverError", "StructuralMechanismError",
    "ConvergenceError",
    "Material", "PA6", "PLA", "ECOFLEX_00_30", "calibrate_modulus",
    "SllSpec", "TrlSpec", "TriMesh", "build_mesh", "validate_mesh", "export_stl",
    "LoadCase", "assemble", "solve", "solve_many", "converge", "converge_many",
]
