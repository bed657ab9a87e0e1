"""Exception types raised across the package."""


class QFlowError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QFlowError, ValueError):
    pass


class ProjectionDegenerateError(QFlowError):
    """Nearest point on the minimizer manifold is not unique.

    ``cells`` holds the offending indices when raised from a field operation.
    """

    def __init__(self, message, cells=None):
        super().__init__(message)
        self.cells = cells


class UndefinedRatioError(QFlowError):
    pass


class KernelDomainError(QFlowError, ValueError):
    pass


class ConfigError(QFlowError):
    pass


class StabilityError(ConfigError):
    pass


class BlowUpError(QFlowError):
    def __init__(self, message, cell=None, time=None):
        super().__init__(message)
        self.cell = cell
        self.time = time


class NeedsSnapshotError(QFlowError):
    def __init__(self, message, required_time=None):
        super().__init__(message)
        self.required_time = required_time


class GapError(QFlowError):
    """Eigenvalue gap too small to define a director (candidate singular cells)."""

    def __init__(self, message, cells=None):
        super().__init__(message)
        self.cells = cells


class OrientationError(QFlowError):
    """The line field cannot be oriented consistently (a sign flip around a loop)."""

    def __init__(self, message, edge=None):
        super().__init__(message)
        self.edge = edge


class UnknownSuiteError(QFlowError):
    pass


class ManifestMismatchError(QFlowError):
    pass
