# core/errors.py
"""
Exception hierarchy shared by the superloop engines.

Every error raised on purpose by the package derives from SuperloopError so
the command line front end can map it to an exit code in one place.
"""

from typing import Any, Dict, Optional


class SuperloopError(Exception):
    """Base class for all domain errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error': type(self).__name__,
            'message': str(self),
            'details': self.details,
        }


class CapExceededError(SuperloopError, ValueError):
    """A desk-scale size cap was exceeded"""


class GradingMismatchError(SuperloopError, ValueError):
    """Operands live in different algebras or gradings"""


class SingularBlockError(SuperloopError, ArithmeticError):
    """A bosonic block has a non-invertible body"""


class NoPerturbativeSolutionError(SuperloopError, RuntimeError):
    """Newton iteration for the rational curve did not converge"""


class DegenerateCurveError(SuperloopError, ValueError):
    """Pole positions of the parametrization collide"""


class NonSimpleBranchPointError(SuperloopError, RuntimeError):
    """x'(z) has a repeated zero"""


class VerificationError(SuperloopError, RuntimeError):
    """A verified identity failed; details carry the offending values"""


class SpecFormatError(SuperloopError, ValueError):
    """Malformed curve spec or command-line input"""
