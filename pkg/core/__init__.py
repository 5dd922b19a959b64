"""
Core modules for superloop
"""

from .errors import (SuperloopError, CapExceededError, GradingMismatchError, SingularBlockError,
                     NoPerturbativeSolutionError, DegenerateCurveError, NonSimpleBranchPointError,
                     VerificationError, SpecFormatError)
from .grassmann import GrassmannAlgebra, GrassmannElement, berezin_integral, determinant_by_integral
from .supermatrix import Grading, SuperMatrix, ConvergenceMatrix
from .polynomial import SuperPolynomial
from .series import FormalSeries, PartitionSeries
from .gaussian_oracle import GaussianOracle
from .fatgraph import FatgraphStar, MomentPolynomial, FatgraphEngine
from .loopcheck import LoopChecker
from .curve import CurveSpec, SpectralCurve, AlgebraicEquation, CurveSolver
from .toprec import (TopologicalRecursion, CorrelatorForm, BergmanKernel, FreeEnergyTable,
                     DualityChecker, swap_xy)

__all__ = [
    'SuperloopError',
    'CapExceededError',
    'GradingMismatchError',
    'SingularBlockError',
    'NoPerturbativeSolutionError',
    'DegenerateCurveError',
    'NonSimpleBranchPointError',
    'VerificationError',
    'SpecFormatError',
    'GrassmannAlgebra',
    'GrassmannElement',
    'berezin_integral',
    'determinant_by_integral',
    'Grading',
    'SuperMatrix',
    'ConvergenceMatrix',
    'SuperPolynomial',
    'FormalSeries',
    'PartitionSeries',
    'GaussianOracle',
    'FatgraphStar',
    'MomentPolynomial',
    'FatgraphEngine',
    'LoopChecker',
    'CurveSpec',
    'SpectralCurve',
    'AlgebraicEquation',
    'CurveSolver',
    'TopologicalRecursion',
    'CorrelatorForm',
    'BergmanKernel',
    'FreeEnergyTable',
    'DualityChecker',
    'swap_xy',
]
