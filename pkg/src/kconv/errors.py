"""Exception types raised across the package."""


class KconvError(Exception):
    """Base class for all package errors."""


class DomainError(KconvError, ValueError):
    """A thermodynamic state left its admissible set (rho <= 0, p <= 0, ...).

    ``cell`` holds the offending index tuple when the input was a field.
    """

    def __init__(self, message, cell=None):
        if cell is not None:
            message = f"{message} at cell {cell}"
        super().__init__(message)
        self.cell = cell


class ParameterError(KconvError, ValueError):
    """Invalid numerical parameter or inconsistent arguments."""


class StepRejected(KconvError, RuntimeError):
    """A time step produced a non-admissible state."""

    def __init__(self, message, cell=None, dt=None):
        if cell is not None:
            message = f"{message} at cell {cell}"
        super().__init__(message)
        self.cell = cell
        self.dt = dt


class VacuumError(KconvError, RuntimeError):
    """Riemann data generates vacuum."""


class SolverError(KconvError, RuntimeError):
    """An iterative solver failed to converge."""


class ConfigError(KconvError, ValueError):
    """Malformed experiment configuration."""


class ConsistencyError(KconvError, ValueError):
    """Stored snapshots do not form a consistent mesh hierarchy."""
