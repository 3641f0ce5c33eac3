"""Finite-dimensional reflection positivity toolkit."""

from .errors import OsposError, PreconditionError
from .linalg import PsdReport, Subspace, psd_check
from .reflection import PartialContraction, Reflection, SignedFormSpace
from .markov import ProjectionTriple, WitnessResult, WitnessStatus
from .renormalize import InducedOperator, RenormalizedSpace

__version__ = "0.1.0"

__all__ = [
    "InducedOperator",
    "OsposError",
    "PartialContraction",
    "PreconditionError",
    "ProjectionTriple",
    "PsdReport",
    "Reflection",
    "RenormalizedSpace",
    "SignedFormSpace",
    "Subspace",
    "WitnessResult",
    "WitnessStatus",
    "psd_check",
]
