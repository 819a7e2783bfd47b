class SpectralError(Exception):
    """Base class for failures inside the spectral toolkit."""


class ConfigurationError(SpectralError, ValueError):
    pass


class SpectralRangeError(SpectralError, ValueError):
    """Request outside the range the integrator/oracle can resolve."""


class BracketingError(SpectralError, RuntimeError):
    """Oscillation counts inconsistent with the requested level."""


class NotAnEigenvalueError(SpectralError, ValueError):
    pass


class TableInvariantError(SpectralError, RuntimeError):
    """A computed spectrum violates an ordering or consistency relation."""


class MapConsistencyError(SpectralError, RuntimeError):
    pass


class ConvergenceError(SpectralError, RuntimeError):
    """Inverse solver failed; ``result`` carries the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IllConditionedError(ConvergenceError):
    pass
