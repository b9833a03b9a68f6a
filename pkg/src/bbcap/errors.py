"""Exception types shared across the library."""


class TruncationError(ValueError):
    """The Fock-space cutoff is too small for the requested state."""


class PhysicalityError(ValueError):
    """A state or covariance matrix violates a physicality bound."""


class CoverageError(ValueError):
    """A phase-space grid captured too little probability mass."""


class EntropyTargetError(ValueError):
    """The requested entropy is outside the reachable range of a family."""
