"""Exception types shared across the package."""


class ContactSkyrmeError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ContactSkyrmeError, ValueError):
    """Invalid parameters: grid resolution, map family, profile tables, ..."""


class InputError(ContactSkyrmeError, ValueError):
    """Invalid runtime data, e.g. a nonpositive coupling sample."""


class ResourceError(ContactSkyrmeError):
    """A requested computation exceeds a configured size cap."""


class NotFoundError(ContactSkyrmeError, KeyError):
    """A requested eigenvalue is not present in the computed spectrum."""


class ClusterAmbiguityError(ContactSkyrmeError):
    """Eigenvalue clusters are too close to count multiplicities reliably."""

    def __init__(self, message, raw_eigenvalues=None):
        super().__init__(message)
        self.raw_eigenvalues = raw_eigenvalues


class EvaluationError(ContactSkyrmeError, ArithmeticError):
    """A numerical evaluation produced a non-finite result."""
