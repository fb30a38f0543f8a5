"""Facet-shell finite elements for thin layered strips."""

from .core import (
    DEFAULT_CG_THRESHOLD,
    DEFAULT_DRILL_RATIO,
    Factorization,
    FeaResult,
    LoadCase,
    LoadKind,
    StiffnessSystem,
    assemble,
    converge,
    converge_many,
    extract_beta,
    factorize,
    load_vector,
    result_to_json,
    result_to_vtk,
    rotational_stiffness,
    scf_from_field,
    solve,
    solve_many,
    stress_concentration,
)
from .kernels import get_backend, set_backend

__all__ = [
    "DEFAULT_CG_THRESHOLD",
    "DEFAULT_DRILL_RATIO",
    "Factorization",
    "FeaResult",
    "LoadCase",
    "LoadKind",
    "StiffnessSystem",
    "assemble",
    "converge",
    "converge_many",
    "extract_beta",
    "factorize",
    "get_backend",
    "load_vector",
    "result_to_json",
    "result_to_vtk",
    "rotational_stiffness",
    "scf_from_field",
    "set_backend",
    "solve",
    "solve_many",
    "stress_concentration",
]
