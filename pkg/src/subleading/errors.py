"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """Input lies outside the domain of the requested quantity."""


class ArgumentError(ValueError):
    """An argument has an invalid value (n <= 0, bad Morse index, ...)."""


class StructuralError(ValueError):
    """Input data violates a structural invariant (topology, monotonicity)."""

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class SchemaError(ValueError):
    """A serialized document does not match its schema."""


class ResourceError(RuntimeError):
    """The requested computation is beyond the supported size."""


class CertificationError(RuntimeError):
    """A rigorous inequality check failed."""


class KTooSmallError(DomainError):
    """No monotone link placement exists for this k on the given tree."""

    def __init__(self, k, min_k):
        super().__init__(f"k={k} too small for this tree; minimal admissible k is {min_k}")
        self.k = k
        self.min_k = min_k
