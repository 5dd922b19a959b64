# core/loopcheck.py
"""
Change-of-variables calculus for supermatrix loop equations.

K(M) = str(∂g/∂M) = Σ_ij σ(i)σ(j) ∂g_ij/∂M_ij is computed on a symbolic
supermatrix whose even entries are commuting variables and whose odd entries
are Grassmann generators (left derivatives). The split and merge rules are
checked order by order in 1/x, and the Schwinger-Dyson identity is checked
through the Gaussian oracle.

Depends on: core.polynomial, core.supermatrix, core.gaussian_oracle
"""

import logging
import random
from typing import Any, Dict, List, Optional, Sequence

from sympy.polys.domains import QQ_I

from .errors import CapExceededError, GradingMismatchError
from .gaussian_oracle import GaussianOracle
from .grassmann import GrassmannAlgebra, as_coefficient
from .polynomial import SuperPolynomial
from .supermatrix import ConvergenceMatrix, Grading, SuperMatrix, random_supermatrix


class SymbolicSpace:
    """
    Polynomial ring holding a generic (p|q) supermatrix M and optional
    extra odd parameters for the coefficient matrices
    """

    def __init__(self, grading: Grading, extra_generators: int = 0):
        self.grading = grading
        size = grading.size
        self.odd_positions = [(i, j) for i in range(size) for j in range(size)
                              if (grading.epsilon(i) + grading.epsilon(j)) & 1]
        self.even_positions = [(i, j) for i in range(size) for j in range(size)
                               if not (grading.epsilon(i) + grading.epsilon(j)) & 1]
        names = [f"m{i}{j}" for i, j in self.odd_positions] + [f"e{k}" for k in range(extra_generators)]
        self.algebra = GrassmannAlgebra(len(names), names=names)
        self.variables = tuple(f"m{i}{j}" for i, j in self.even_positions)
        self.generator_of = {pos: k for k, pos in enumerate(self.odd_positions)}
        self.extra = list(range(len(self.odd_positions), len(names)))

        zero = self.zero()
        rows = [[zero] * size for _ in range(size)]
        for i, j in self.even_positions:
            rows[i][j] = SuperPolynomial.variable(self.algebra, self.variables, f"m{i}{j}")
        for (i, j), k in self.generator_of.items():
            rows[i][j] = SuperPolynomial.generator(self.algebra, self.variables, k)
        self.matrix = SuperMatrix(grading, rows)

    def zero(self) -> SuperPolynomial:
        return SuperPolynomial(self.algebra, self.variables, {})

    def lift(self, matrix: SuperMatrix) -> SuperMatrix:
        """Embed a matrix of Grassmann elements (or scalars) as constant polynomials"""
        zero = self.zero()
        return matrix.map_entries(lambda v: zero.lift(v))

    def derivative(self, poly: SuperPolynomial, i: int, j: int) -> SuperPolynomial:
        """∂/∂M_ij, a left derivative at odd positions"""
        if (i, j) in self.generator_of:
            return poly.left_derivative(self.generator_of[(i, j)])
        return poly.derivative(f"m{i}{j}")

    def random_coefficients(self, rng: random.Random, density: float = 0.5) -> SuperMatrix:
        """Random even supermatrix over the extra generators"""
        return self.lift(random_supermatrix(self.grading, self.algebra, rng, self.extra, True, density))


class TruncatedResolventSeries:
    """
    (x - BM)^{-1} = Σ_{k≤T} x^{-k-1} (BM)^k
    """

    def __init__(self, b: SuperMatrix, m: SuperMatrix, order: int):
        if b.grading != m.grading:
            raise GradingMismatchError(f"Grading mismatch: {b.grading} vs {m.grading}")
        self.order = order
        bm = b * m
        self.coefficients: List[SuperMatrix] = [SuperMatrix.identity(m.grading, m.zero())]
        for _ in range(order):
            self.coefficients.append(self.coefficients[-1] * bm)

    def coefficient(self, k: int) -> SuperMatrix:
        """Coefficient of x^{-k-1}"""
        return self.coefficients[k]


class LoopChecker:
    """
    Verifies K(M) identities and the Schwinger-Dyson equation
    """

    def __init__(self, config: Dict[str, Any] = None, oracle: Optional[GaussianOracle] = None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)

        self.default_order = self.config.get('truncation_order', 6)
        self.sd_cap = self.config.get('partition_size_cap', 3)
        self.oracle = oracle or GaussianOracle(self.config)

        self.logger.info("LoopChecker initialized")

    def berezinian_first_order(self, g: SuperMatrix, space: SymbolicSpace) -> SuperPolynomial:
        """
        K = Σ_ij σ(i)σ(j) ∂g_ij/∂M_ij, first-order term of sdet(∂M'/∂M) for M' = M + εg
        """
        grading = space.grading
        if g.grading != grading:
            raise GradingMismatchError(f"Grading mismatch: {g.grading} vs {grading}")
        total = space.zero()
        for i in range(grading.size):
            for j in range(grading.size):
                term = space.derivative(g[i, j], i, j)
                if grading.sigma(i) * grading.sigma(j) > 0:
                    total = total + term
                else:
                    total = total - term
        return total

    def _check_triple(self, space: SymbolicSpace, *matrices: SuperMatrix):
        for mat in matrices:
            if mat.grading != space.grading:
                raise GradingMismatchError(f"Grading mismatch: {mat.grading} vs {space.grading}")

    def split_rule_residual(self, a: SuperMatrix, b: SuperMatrix, c: SuperMatrix, space: SymbolicSpace,
                            order: Optional[int] = None) -> Dict[str, Any]:
        """
        K(A (x-BM)^{-1} C) - str(A (x-BM)^{-1} B) str((x-BM)^{-1} C), order by order in 1/x

        Returns:
            Report with the residual polynomial at each order and a holds flag
        """
        order = self.default_order if order is None else order
        self._check_triple(space, a, b, c)
        r = TruncatedResolventSeries(b, space.matrix, order)
        left_traces = [(a * r.coefficient(k) * b).str() for k in range(order)]
        right_traces = [(r.coefficient(k) * c).str() for k in range(order)]

        residuals = []
        for k in range(order + 1):
            lhs = self.berezinian_first_order(a * r.coefficient(k) * c, space)
            rhs = space.zero()
            for l in range(k):
                rhs = rhs + left_traces[l] * right_traces[k - 1 - l]
            residuals.append(lhs - rhs)
        return self._rule_report('split', residuals)

    def merge_rule_residual(self, a: SuperMatrix, b: SuperMatrix, c: SuperMatrix, space: SymbolicSpace,
                            order: Optional[int] = None) -> Dict[str, Any]:
        """
        K(A str((x-BM)^{-1} C)) - str(A (x-BM)^{-1} C (x-BM)^{-1} B), order by order in 1/x
        """
        order = self.default_order if order is None else order
        self._check_triple(space, a, b, c)
        r = TruncatedResolventSeries(b, space.matrix, order)

        residuals = []
        for k in range(order + 1):
            trace = (r.coefficient(k) * c).str()
            g = a.map_entries(lambda v: v * trace)
            lhs = self.berezinian_first_order(g, space)
            rhs = space.zero()
            for l in range(k):
                rhs = rhs + (a * r.coefficient(l) * c * r.coefficient(k - 1 - l) * b).str()
            residuals.append(lhs - rhs)
        return self._rule_report('merge', residuals)

    def _rule_report(self, rule: str, residuals: List[SuperPolynomial]) -> Dict[str, Any]:
        failing = [k for k, res in enumerate(residuals) if not res.is_zero()]
        if failing:
            self.logger.warning(f"{rule} rule residual nonzero at orders {failing}")
        return {
            'rule': rule,
            'residuals': residuals,
            'failing_orders': failing,
            'holds': not failing,
        }

    def randomized_rule_check(self, grading: Grading, triples: int, order: Optional[int] = None,
                              seed: int = 0, extra_generators: int = 2) -> Dict[str, Any]:
        """
        Split and merge rules on random graded triples

        Returns:
            Counts of passing triples for each rule
        """
        rng = random.Random(seed)
        space = SymbolicSpace(grading, extra_generators)
        passed = {'split': 0, 'merge': 0}
        for t in range(triples):
            a, b, c = (space.random_coefficients(rng) for _ in range(3))
            if self.split_rule_residual(a, b, c, space, order)['holds']:
                passed['split'] += 1
            if self.merge_rule_residual(a, b, c, space, order)['holds']:
                passed['merge'] += 1
            self.logger.debug(f"Triple {t + 1}/{triples} on {grading} checked")
        return {
            'grading': grading.to_dict(),
            'triples': triples,
            'order': self.default_order if order is None else order,
            'passed': passed,
            'holds': passed['split'] == triples and passed['merge'] == triples,
        }

    # --- Schwinger-Dyson ---------------------------------------------------

    def sd_residual(self, grading: Grading, hbar, y_values: Optional[Sequence[Any]] = None,
                    trace_factors: Sequence[int] = (), order: Optional[int] = None,
                    scale=1) -> Dict[str, Any]:
        """
        ⟨K(I†N)⟩ - (1/ħ)⟨str(I g(I†N) V'(N))⟩ for V(N) = N²/2 - NY

        g(M) = I† (x - IM)^{-1} Π_k str((IM)^{n_k}), expanded in 1/x. The
        expectation is the Gaussian one with mean Y.

        Args:
            grading: Grading (p|q)
            hbar: Exact ħ
            y_values: Diagonal external field
            trace_factors: Powers n_k of the optional supertrace factors
            order: Highest power of (IM) kept in the resolvent
            scale: Overall constant multiplying g (0 gives the trivial identity)

        Returns:
            Per-order report with K, quadratic, source and residual values
        """
        order = 4 if order is None else order
        if grading.size > self.sd_cap:
            raise CapExceededError(f"Schwinger-Dyson check size {grading.size} exceeds cap {self.sd_cap}",
                                   {'p': grading.p, 'q': grading.q})
        hbar = as_coefficient(hbar)
        scale = as_coefficient(scale)
        y = [as_coefficient(v) for v in y_values] if y_values else [QQ_I.zero] * grading.size

        space = SymbolicSpace(grading)
        model = self.oracle.build_model(grading)
        n_matrix = model.shifted(y)
        target = n_matrix.zero()

        # M -> I†N on the symbolic entries
        dagger_phase = [QQ_I.one if grading.sigma(i) > 0 else QQ_I(0, -1) for i in range(grading.size)]
        variable_images = {f"m{i}{j}": n_matrix[i, j] * dagger_phase[i] for i, j in space.even_positions}
        generator_images = {k: n_matrix[i, j] * dagger_phase[i] for (i, j), k in space.generator_of.items()}

        conv = ConvergenceMatrix(grading, space.zero())
        conv_dagger = conv.dagger()
        im = conv * space.matrix
        factor = space.zero().one_like() * scale
        for n in trace_factors:
            factor = factor * (im ** n).str()

        n_factor = target.one_like() * scale
        for n in trace_factors:
            n_factor = n_factor * (n_matrix ** n).str()
        y_matrix = SuperMatrix.diagonal(grading, y, target)
        derivative_v = n_matrix - y_matrix

        rows = []
        im_power = SuperMatrix.identity(grading, space.zero())
        n_power = SuperMatrix.identity(grading, target)
        for k in range(order + 1):
            g = (conv_dagger * im_power).map_entries(lambda v: v * factor)
            k_symbolic = self.berezinian_first_order(g, space)
            k_value = self.oracle._scalar_expectation(
                model, k_symbolic.compose(variable_images, generator_images, target), hbar)

            # I g(I†N) = N^k · (trace factors), since I I† = 1
            ign = n_power.map_entries(lambda v: v * n_factor)
            quadratic = self.oracle._scalar_expectation(model, (ign * n_matrix).str(), hbar) / hbar
            source = -self.oracle._scalar_expectation(model, (ign * y_matrix).str(), hbar) / hbar
            residual = k_value - quadratic - source
            rows.append({
                'order': k,
                'k_terms': k_value,
                'quadratic_terms': quadratic,
                'source_terms': source,
                'residual': residual,
            })
            im_power = im_power * im
            n_power = n_power * n_matrix

        holds = all(not row['residual'] for row in rows)
        if not holds:
            self.logger.warning(f"Schwinger-Dyson residual nonzero on {grading}")
        return {
            'grading': grading.to_dict(),
            'hbar': hbar,
            'trace_factors': list(trace_factors),
            'orders': rows,
            'holds': holds,
        }


# Test the loop calculus
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    checker = LoopChecker()
    print(checker.randomized_rule_check(Grading(1, 1), triples=2, order=3))
    report = checker.sd_residual(Grading(1, 1), 1, order=3)
    print([str(row['residual']) for row in report['orders']])
