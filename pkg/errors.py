"""
Exception hierarchy for hiconvex.
Every checker raises a subclass of HiconvexError; the CLI maps them to exit status 2.
"""

from typing import Optional


class HiconvexError(Exception):
    """Base class for all hiconvex errors."""


class CoincidentNodesError(HiconvexError):
    """Two nodes are closer than the minimum gap."""


class UnsortedDataError(HiconvexError):
    """Abscissae are not in ascending order."""


class OrderTooLargeError(HiconvexError):
    """Requested divided-difference order needs more nodes than available."""


class InsufficientNodesError(HiconvexError):
    """A verdict of order n needs at least n+1 nodes."""


class DomainError(HiconvexError):
    """A point lies outside the domain of a model."""


class QuadratureError(HiconvexError):
    """Adaptive quadrature did not reach its tolerance within the depth cap."""


class VerificationError(HiconvexError):
    """A tangent parabola failed its side inequality."""


class InterpolationError(HiconvexError):
    """Interpolation nodes coincide."""


class ParameterError(HiconvexError):
    """A scalar parameter is outside its admissible range."""


class MeasureError(HiconvexError):
    """A discrete measure violates its invariants or leaves the interval."""


class WeightSpecError(HiconvexError):
    """A weight and its primitive are inconsistent."""


class ConvergenceError(HiconvexError):
    """The rotation eigensolver did not converge."""


class NonCommutingError(HiconvexError):
    """A matrix family does not commute within tolerance."""


class DegeneracyError(HiconvexError):
    """Clustered eigenvalues could not be resolved by block refinement."""


class DimensionError(HiconvexError):
    """Matrix dimensions do not agree."""


class InputError(HiconvexError):
    """Malformed input file or inline document."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
                if column is not None:
                    location += f":{column}"
            location += ": "
        super().__init__(f"{location}{message}")
