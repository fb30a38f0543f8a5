"""Backend switch for the element kernels.

``TRLSIM_BACKEND=numpy`` forces the vectorized numpy path; otherwise numba is
used when it imports. ``set_backend`` changes the choice at runtime.
"""

import os

import numpy as np

from . import _numpy_kernels
from ._numpy_kernels import MEMBRANE_ALLMAN, MEMBRANE_CST

try:
    from . import _numba_kernels
except ImportError:  # numba missing or broken
    _numba_kernels = None

BACKENDS = ("numba", "numpy")
MEMBRANES = {"allman": MEMBRANE_ALLMAN, "cst": MEMBRANE_CST}
_ENV = "TRLSIM_BACKEND"


def _initial_backend():
    requested = os.environ.get(_ENV, "").strip().lower()
    if requested and requested not in BACKENDS:
        raise RuntimeError(f"{_ENV}={requested!r}; expected one of {BACKENDS}")
    if requested == "numpy" or _numba_kernels is None:
        return "numpy"
    return "numba"


_backend = _initial_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Select a backend and return the previous one."""
    global _backend
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and _numba_kernels is None:
        raise RuntimeError("numba backend requested but numba is not importable")
    previous, _backend = _backend, name
    return previous


def numba_available() -> bool:
    return _numba_kernels is not None


def _module():
    return _numba_kernels if _backend == "numba" else _numpy_kernels


def membrane_code(name: str) -> int:
    try:
        return MEMBRANES[name]
    except KeyError:
        raise ValueError(f"unknown membrane formulation {name!r}; expected one of {sorted(MEMBRANES)}") from None


def element_stiffness(coords, thickness, E, nu, drill_ratio, membrane="allman"):
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    thickness = np.ascontiguousarray(thickness, dtype=np.float64)
    return _module().element_stiffness(coords, thickness, float(E), float(nu), float(drill_ratio),
                                       membrane_code(membrane))


def element_stress(coords, thickness, E, nu, ue, membrane="allman"):
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    thickness = np.ascontiguousarray(thickness, dtype=np.float64)
    ue = np.ascontiguousarray(ue, dtype=np.float64)
    return _module().element_stress(coords, thickness, float(E), float(nu), ue, membrane_code(membrane))
