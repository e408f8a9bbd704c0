"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by :mod:`twoch`."""


class MalformedStateError(SolverError, ValueError):
    """A state carries non-finite values or inconsistent array shapes."""


class DomainError(SolverError, ValueError):
    """A parameter lies outside its mathematical domain (e.g. eta <= 0)."""


class UnsupportedParameterError(SolverError, ValueError):
    """The request is well defined but not implemented by this solver."""

    def __init__(self, message, **values):
        super().__init__(message)
        self.values = values


class CoverageError(SolverError, ValueError):
    """A grid does not cover the range required by a transform."""


class DegenerateStateError(SolverError, ValueError):
    """A Lagrangian state violates monotonicity needed by an operation."""


class InvalidRelabelingError(SolverError, ValueError):
    """A relabeling map is not a member of the relabeling group."""


class GridMismatchError(SolverError, ValueError):
    """Two states that must share a grid do not."""


class InvariantViolation(SolverError):
    """A hard invariant exceeded its configured bound during a run."""


class BlowUpError(SolverError, FloatingPointError):
    """Time integration produced non-finite values.

    ``trajectory`` holds whatever was computed before the failure and
    ``stage`` names the Runge-Kutta stage that produced the bad values.
    """

    def __init__(self, message, stage=None, t=None, trajectory=None):
        super().__init__(message)
        self.stage = stage
        self.t = t
        self.trajectory = trajectory


class ConfigError(SolverError, ValueError):
    """Scenario configuration is missing, malformed, or out of range."""
