# core/polynomial.py
"""
Polynomials in commuting variables with Grassmann coefficients.

Used as the entry ring of symbolic supermatrices: bosonic matrix entries and
Gaussian oracle variables are the commuting variables, fermionic entries live
in the coefficient algebra. Terms are stored flat as
{(exponents, grassmann_mask): QQ_I} which keeps products cheap.

Depends on: core.grassmann
"""

from typing import Dict, Iterator, Sequence, Tuple

from sympy.polys.domains import QQ_I

from .grassmann import (GrassmannAlgebra, GrassmannElement, as_coefficient,
                        monomial_product, popcount)
from .errors import GradingMismatchError

Exponents = Tuple[int, ...]
Key = Tuple[Exponents, int]


class SuperPolynomial:
    """
    Polynomial over a Grassmann algebra in named commuting variables
    """

    __slots__ = ('algebra', 'variables', 'terms')

    def __init__(self, algebra: GrassmannAlgebra, variables: Sequence[str],
                 terms: Dict[Key, object] = None):
        self.algebra = algebra
        self.variables = tuple(variables)
        self.terms = {k: c for k, c in (terms or {}).items() if c}

    # --- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, algebra: GrassmannAlgebra, variables: Sequence[str], value) -> 'SuperPolynomial':
        zero_exps = (0,) * len(variables)
        if isinstance(value, GrassmannElement):
            return cls(algebra, variables, {(zero_exps, m): c for m, c in value.terms.items()})
        return cls(algebra, variables, {(zero_exps, 0): as_coefficient(value)})

    @classmethod
    def variable(cls, algebra: GrassmannAlgebra, variables: Sequence[str], name: str,
                 coefficient=1) -> 'SuperPolynomial':
        exps = [0] * len(variables)
        exps[list(variables).index(name)] = 1
        return cls(algebra, variables, {(tuple(exps), 0): as_coefficient(coefficient)})

    @classmethod
    def generator(cls, algebra: GrassmannAlgebra, variables: Sequence[str], index: int,
                  coefficient=1) -> 'SuperPolynomial':
        return cls.constant(algebra, variables, algebra.generator(index) * as_coefficient(coefficient))

    def zero_like(self) -> 'SuperPolynomial':
        return SuperPolynomial(self.algebra, self.variables, {})

    def one_like(self) -> 'SuperPolynomial':
        return SuperPolynomial.constant(self.algebra, self.variables, 1)

    def lift(self, value) -> 'SuperPolynomial':
        """Embed a scalar or Grassmann element as a constant polynomial"""
        if isinstance(value, SuperPolynomial):
            if value.variables != self.variables or not self.algebra.compatible(value.algebra):
                raise GradingMismatchError("Polynomial rings differ")
            return value
        return SuperPolynomial.constant(self.algebra, self.variables, value)

    # --- structure -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> GrassmannElement:
        zero_exps = (0,) * len(self.variables)
        return GrassmannElement(self.algebra, {m: c for (e, m), c in self.terms.items() if e == zero_exps})

    def body(self):
        return self.terms.get(((0,) * len(self.variables), 0), QQ_I.zero)

    def total_degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def parities(self) -> set:
        return {popcount(m) & 1 for _, m in self.terms}

    def is_even(self) -> bool:
        return self.parities() <= {0}

    def is_odd(self) -> bool:
        return self.parities() <= {1}

    def items(self) -> Iterator[Tuple[Exponents, int, object]]:
        for (e, m), c in self.terms.items():
            yield e, m, c

    def grouped(self) -> Dict[Exponents, GrassmannElement]:
        """Coefficient of each commuting monomial as a GrassmannElement"""
        out: Dict[Exponents, Dict[int, object]] = {}
        for (e, m), c in self.terms.items():
            out.setdefault(e, {})[m] = c
        return {e: GrassmannElement(self.algebra, t) for e, t in out.items()}

    # --- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = self.lift(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        return SuperPolynomial(self.algebra, self.variables, terms)

    def __radd__(self, other):
        return self.lift(other) + self

    def __neg__(self):
        return SuperPolynomial(self.algebra, self.variables, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self.lift(other))

    def __rsub__(self, other):
        return self.lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, (SuperPolynomial, GrassmannElement)):
            c = as_coefficient(other)
            return SuperPolynomial(self.algebra, self.variables, {k: v * c for k, v in self.terms.items()})
        other = self.lift(other)
        terms: Dict[Key, object] = {}
        for (ea, ma), ca in self.terms.items():
            for (eb, mb), cb in other.terms.items():
                sign, mask = monomial_product(ma, mb)
                if not sign:
                    continue
                key = (tuple(x + y for x, y in zip(ea, eb)), mask)
                value = ca * cb if sign > 0 else -(ca * cb)
                terms[key] = terms[key] + value if key in terms else value
        return SuperPolynomial(self.algebra, self.variables, terms)

    def __rmul__(self, other):
        # other sits on the left; order matters for odd coefficients
        return self.lift(other) * self

    def __pow__(self, k: int):
        result = self.one_like()
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, SuperPolynomial):
            return (self - other).is_zero()
        try:
            return (self - self.lift(other)).is_zero()
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    # --- calculus --------------------------------------------------------

    def derivative(self, name: str) -> 'SuperPolynomial':
        """Partial derivative in a commuting variable"""
        k = self.variables.index(name)
        terms = {}
        for (e, m), c in self.terms.items():
            if e[k]:
                new = list(e)
                new[k] -= 1
                terms[(tuple(new), m)] = c * e[k]
        return SuperPolynomial(self.algebra, self.variables, terms)

    def left_derivative(self, i: int) -> 'SuperPolynomial':
        """Left derivative in Grassmann generator i"""
        self.algebra._check_index(i)
        bit = 1 << i
        below = bit - 1
        terms = {}
        for (e, m), c in self.terms.items():
            if m & bit:
                odd = popcount(m & below) & 1
                terms[(e, m ^ bit)] = -c if odd else c
        return SuperPolynomial(self.algebra, self.variables, terms)

    def substitute(self, values: Dict[str, object]) -> 'SuperPolynomial':
        """Replace some commuting variables by exact scalars"""
        idx = {self.variables.index(name): as_coefficient(v) for name, v in values.items()}
        terms: Dict[Key, object] = {}
        for (e, m), c in self.terms.items():
            factor = c
            new = list(e)
            for k, v in idx.items():
                if e[k]:
                    factor = factor * v ** e[k]
                    new[k] = 0
            key = (tuple(new), m)
            terms[key] = terms[key] + factor if key in terms else factor
        return SuperPolynomial(self.algebra, self.variables, terms)

    def compose(self, variable_images: Dict[str, 'SuperPolynomial'],
                generator_images: Dict[int, 'SuperPolynomial'], target: 'SuperPolynomial') -> 'SuperPolynomial':
        """
        Ring map into another polynomial ring

        Generators must map to odd elements; monomials are multiplied out in
        ascending generator order.

        Args:
            variable_images: Image of every commuting variable
            generator_images: Image of every generator that occurs
            target: Any element of the target ring (supplies zero and one)
        """
        one = target.one_like()
        powers: Dict[Tuple[str, int], SuperPolynomial] = {}

        def power(name: str, k: int) -> 'SuperPolynomial':
            key = (name, k)
            if key not in powers:
                powers[key] = variable_images[name] ** k
            return powers[key]

        result = target.zero_like()
        for e, m, c in self.items():
            term = one * c
            for name, k in zip(self.variables, e):
                if k:
                    term = term * power(name, k)
            i = 0
            mask = m
            while mask and not term.is_zero():
                if mask & 1:
                    term = term * generator_images[i]
                mask >>= 1
                i += 1
            result = result + term
        return result

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (e, m), c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(self.variables, e) if k)
            gens = "".join(self.algebra.names[i] for i in range(self.algebra.generator_count) if m >> i & 1)
            parts.append(f"({QQ_I.to_sympy(c)}){gens}{('*' + mono) if mono else ''}")
        return " + ".join(parts)
