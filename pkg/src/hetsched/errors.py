"""Exception hierarchy shared across the package."""


class HetschedError(Exception):
    """Base class for all package errors."""


class ValidationError(HetschedError):
    """A workload, system, or schedule violates a structural invariant."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConfigError(HetschedError):
    """Bad configuration values (zero bandwidth, unknown device type, ...)."""


class InfeasibleError(HetschedError):
    """No schedule exists, typically because a kernel is eligible nowhere."""


class OracleSizeError(HetschedError):
    """Instance exceeds the exhaustive-search size guard."""


class FitError(HetschedError):
    """Regression fitting failed (underdetermined or rank-deficient data)."""


class SimConflictError(HetschedError):
    """Two transfers overlapped on the same device group during simulation."""
