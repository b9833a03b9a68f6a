"""Capacity regions and minimum-output-entropy checks for the lossy
single-mode bosonic beam-splitter broadcast channel."""

__version__ = "0.1.0"

from . import capacity, conjecture, fock, gaussian, scalar
from .errors import (CoverageError, EntropyTargetError, PhysicalityError,
                     TruncationError)

__all__ = [
    "__version__",
    "capacity",
    "conjecture",
    "fock",
    "gaussian",
    "scalar",
    "CoverageError",
    "EntropyTargetError",
    "PhysicalityError",
    "TruncationError",
]
