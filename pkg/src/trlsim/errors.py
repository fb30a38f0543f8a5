"""Exception types shared across the package."""


class TrlsimError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TrlsimError, ValueError):
    """A caller supplied a value outside an operation's domain."""


class MeshingError(TrlsimError):
    """Geometry could not be discretized."""


class SolverError(TrlsimError):
    """The linear solve failed."""


class StructuralMechanismError(SolverError):
    """The constrained stiffness matrix is not positive definite."""


class ConvergenceError(SolverError):
    """Refinement or iteration stopped before reaching tolerance.

    ``history`` holds whatever diagnostics were collected up to the failure.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])
