"""Exception types shared across the package."""


class NrbkError(Exception):
    """Base class for all package-specific failures."""


class AccuracyError(NrbkError):
    """A routine detected that it cannot meet its accuracy contract."""


class ZeroFindingError(NrbkError):
    """Newton iteration failed, or the zero set is inconsistent with the count rule."""

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class AssemblyError(NrbkError):
    """Quadrature under-resolution or an inconsistent operator assembly."""


class ConfigurationError(NrbkError):
    """Invalid parameters, config keys, or stability-region violations."""


class IntegrationError(NrbkError):
    """Time integration produced NaN or diverged."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ResolutionError(NrbkError):
    """A resolution check (grid doubling, truncation) failed to converge."""
