# core/grassmann.py
"""
Exact arithmetic in a finite Grassmann algebra.

Monomials are bitmasks over generator indices, read in ascending order.
Coefficients are Gaussian rationals (sympy QQ_I) so every identity checked
downstream is exact.
"""

import logging
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.polys.domains import QQ, QQ_I

from .errors import GradingMismatchError, CapExceededError

MAX_GENERATORS = 64

Scalar = Union[int, Fraction, 'sympy.Expr', object]


def as_coefficient(value) -> object:
    """
    Convert a scalar to a Gaussian rational

    Args:
        value: int, Fraction, QQ/QQ_I element, sympy number or "num/den" string

    Returns:
        QQ_I element
    """
    if QQ_I.of_type(value):
        return value
    if isinstance(value, bool):
        return QQ_I(int(value), 0)
    if isinstance(value, int):
        return QQ_I(value, 0)
    if isinstance(value, Fraction):
        return QQ_I(QQ(value.numerator, value.denominator), 0)
    if QQ.of_type(value):
        return QQ_I(value, 0)
    if isinstance(value, str):
        return QQ_I.from_sympy(sympy.Rational(value))
    if isinstance(value, float):
        raise TypeError(f"Floating point coefficient {value!r} is not exact")
    return QQ_I.from_sympy(sympy.sympify(value))


def conjugate_coefficient(c) -> object:
    return QQ_I(c.x, -c.y)


def popcount(mask: int) -> int:
    return bin(mask).count('1')


def mask_indices(mask: int) -> List[int]:
    """Generator indices of a monomial, ascending"""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


@lru_cache(maxsize=None)
def monomial_product(mask_a: int, mask_b: int) -> Tuple[int, int]:
    """
    Product of two canonical monomials

    Args:
        mask_a: Left monomial
        mask_b: Right monomial

    Returns:
        (sign, mask); sign is 0 when a generator repeats
    """
    if mask_a & mask_b:
        return 0, 0
    swaps = 0
    for t in mask_indices(mask_b):
        swaps += popcount(mask_a >> (t + 1))
    return (-1 if swaps & 1 else 1), mask_a | mask_b


class GrassmannAlgebra:
    """
    Finite Grassmann algebra with optional conjugation pairing
    """

    def __init__(self, generator_count: int,
                 conjugate_pairs: Optional[Iterable[Tuple[int, int]]] = None,
                 names: Optional[Sequence[str]] = None):
        if generator_count < 0 or generator_count > MAX_GENERATORS:
            raise CapExceededError(
                f"Generator count {generator_count} outside [0, {MAX_GENERATORS}]",
                {'generator_count': generator_count})
        self.generator_count = generator_count
        self.partner: Dict[int, int] = {}
        for i, j in conjugate_pairs or []:
            self._check_index(i)
            self._check_index(j)
            self.partner[i] = j
            self.partner[j] = i
        self.names = list(names) if names else [f"t{i}" for i in range(generator_count)]
        self.logger = logging.getLogger(__name__)

    def _check_index(self, i: int):
        if not 0 <= i < self.generator_count:
            raise IndexError(f"Generator index {i} out of range for {self.generator_count} generators")

    def compatible(self, other: 'GrassmannAlgebra') -> bool:
        return self is other or self.generator_count == other.generator_count

    def zero(self) -> 'GrassmannElement':
        return GrassmannElement(self, {})

    def one(self) -> 'GrassmannElement':
        return self.scalar(1)

    def scalar(self, value) -> 'GrassmannElement':
        return GrassmannElement(self, {0: as_coefficient(value)})

    def generator(self, i: int) -> 'GrassmannElement':
        self._check_index(i)
        return GrassmannElement(self, {1 << i: QQ_I.one})

    def monomial(self, indices: Sequence[int], coefficient=1) -> 'GrassmannElement':
        """Ordered product of generators with a coefficient"""
        elem = self.scalar(coefficient)
        for i in indices:
            elem = elem * self.generator(i)
        return elem

    def __repr__(self):
        return f"GrassmannAlgebra({self.generator_count})"


class GrassmannElement:
    """
    Sparse element of a Grassmann algebra: {bitmask: QQ_I coefficient}
    """

    __slots__ = ('algebra', 'terms')

    def __init__(self, algebra: GrassmannAlgebra, terms: Dict[int, object]):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}

    # --- structure -------------------------------------------------------

    @property
    def generator_count(self) -> int:
        return self.algebra.generator_count

    def body(self):
        return self.terms.get(0, QQ_I.zero)

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(m == 0 for m in self.terms)

    def parities(self) -> set:
        return {popcount(m) & 1 for m in self.terms}

    def is_even(self) -> bool:
        return self.parities() <= {0}

    def is_odd(self) -> bool:
        return self.parities() <= {1}

    def degree_parity(self) -> int:
        """Parity of a homogeneous element (0 for zero)"""
        parities = self.parities()
        if len(parities) > 1:
            raise ValueError("Element is not homogeneous")
        return parities.pop() if parities else 0

    def zero_like(self) -> 'GrassmannElement':
        return self.algebra.zero()

    def one_like(self) -> 'GrassmannElement':
        return self.algebra.one()

    # --- arithmetic ------------------------------------------------------

    def _coerce(self, other) -> 'GrassmannElement':
        if isinstance(other, GrassmannElement):
            if not self.algebra.compatible(other.algebra):
                raise GradingMismatchError(
                    f"Generator count mismatch: {self.generator_count} vs {other.generator_count}")
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        if not isinstance(other, GrassmannElement) and _is_foreign(other):
            return NotImplemented
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, QQ_I.zero) + c
        return GrassmannElement(self.algebra, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, GrassmannElement) and _is_foreign(other):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            if _is_foreign(other):
                return NotImplemented
            c = as_coefficient(other)
            return GrassmannElement(self.algebra, {m: v * c for m, v in self.terms.items()})
        other = self._coerce(other)
        terms: Dict[int, object] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                sign, mask = monomial_product(ma, mb)
                if sign == 0:
                    continue
                value = ca * cb if sign > 0 else -(ca * cb)
                terms[mask] = terms.get(mask, QQ_I.zero) + value
        return GrassmannElement(self.algebra, terms)

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, GrassmannElement):
            return self * other.inverse()
        c = as_coefficient(other)
        return self * (QQ_I.one / c)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.one_like()
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, GrassmannElement):
            return self.generator_count == other.generator_count and self.terms == other.terms
        try:
            other = as_coefficient(other)
        except (TypeError, ValueError, sympy.SympifyError):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        if self.is_scalar():
            # equal to its coefficient, so hash like it
            return hash(self.body())
        return hash((self.generator_count, frozenset(self.terms.items())))

    # --- calculus --------------------------------------------------------

    def left_derivative(self, i: int) -> 'GrassmannElement':
        """
        Left derivative with respect to generator i

        Args:
            i: Generator index

        Returns:
            Derivative; monomials lacking θ_i drop out
        """
        self.algebra._check_index(i)
        bit = 1 << i
        below = bit - 1
        terms = {}
        for m, c in self.terms.items():
            if m & bit:
                sign = -1 if popcount(m & below) & 1 else 1
                terms[m ^ bit] = c if sign > 0 else -c
        return GrassmannElement(self.algebra, terms)

    def conjugate(self) -> 'GrassmannElement':
        """
        Complex conjugation: (c θ_i θ_j)* = c* θ_j* θ_i*
        """
        terms: Dict[int, object] = {}
        for m, c in self.terms.items():
            sign, mask = 1, 0
            for idx in reversed(mask_indices(m)):
                if idx not in self.algebra.partner:
                    raise ValueError(f"Generator {idx} has no declared conjugate partner")
                s, mask = monomial_product(mask, 1 << self.algebra.partner[idx])
                sign *= s
            value = conjugate_coefficient(c)
            terms[mask] = terms.get(mask, QQ_I.zero) + (value if sign > 0 else -value)
        return GrassmannElement(self.algebra, terms)

    def exp_nilpotent(self) -> 'GrassmannElement':
        """
        Terminating exponential of an even element with zero body
        """
        if self.body():
            raise ValueError("exp_nilpotent requires an element with zero body")
        if not self.is_even():
            raise ValueError("exp_nilpotent requires an even element")
        result = self.one_like()
        term = self.one_like()
        k = 1
        while True:
            term = term * self
            if term.is_zero():
                break
            result = result + term * QQ_I(QQ(1, factorial(k)), 0)
            k += 1
        return result

    def inverse(self) -> 'GrassmannElement':
        """Inverse of an element with invertible body"""
        b = self.body()
        if not b:
            raise ZeroDivisionError("Grassmann element has zero body")
        b_inv = QQ_I.one / b
        nil = (self - self.algebra.scalar(b)) * b_inv
        result = self.one_like()
        term = self.one_like()
        while True:
            term = term * (-nil)
            if term.is_zero():
                break
            result = result + term
        return result * b_inv

    # --- presentation ----------------------------------------------------

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda k: (popcount(k), k)):
            c = QQ_I.to_sympy(self.terms[m])
            gens = "".join(self.algebra.names[i] for i in mask_indices(m))
            parts.append(f"({c}){gens}" if gens else f"({c})")
        return " + ".join(parts)


def _is_foreign(other) -> bool:
    """True when another ring type should handle the operation"""
    return hasattr(other, 'zero_like') and not isinstance(other, GrassmannElement)


def berezin_integral(a: GrassmannElement, indices: Sequence[int]) -> GrassmannElement:
    """
    Iterated Berezin integral ∫dθ_{i1}...dθ_{ik} a

    The innermost (last listed) differential acts first.

    Args:
        a: Integrand
        indices: Ordered generator indices

    Returns:
        Integrated element
    """
    if len(set(indices)) != len(indices):
        raise ValueError(f"Repeated generator in integration list {list(indices)}")
    result = a
    for i in reversed(list(indices)):
        result = result.left_derivative(i)
    return result


def determinant_by_integral(matrix: Sequence[Sequence[object]]) -> object:
    """
    det X as ∫ Π dθ*_k dθ_k exp(-θ* X θ)

    Generators are interleaved as (θ*_1, θ_1, θ*_2, θ_2, ...).

    Args:
        matrix: Square matrix of exact scalars

    Returns:
        QQ_I determinant
    """
    n = len(matrix)
    algebra = GrassmannAlgebra(2 * n, [(2 * k, 2 * k + 1) for k in range(n)])
    action = algebra.zero()
    for i in range(n):
        for j in range(n):
            coefficient = as_coefficient(matrix[i][j])
            if coefficient:
                action = action + algebra.generator(2 * i) * algebra.generator(2 * j + 1) * coefficient
    integrand = (-action).exp_nilpotent()
    return berezin_integral(integrand, list(range(2 * n))).body()


# Test the grassmann kernel
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    algebra = GrassmannAlgebra(4, [(0, 1), (2, 3)], names=['θ', 'θ*', 'η', 'η*'])
    theta, theta_c, eta, eta_c = (algebra.generator(i) for i in range(4))
    exponent = theta_c * theta + theta_c * eta + eta_c * theta
    print(f"∫dθdθ* exp(...) = {berezin_integral(exponent.exp_nilpotent(), [0, 1])}")
    print(f"det [[1,2],[3,4]] = {determinant_by_integral([[1, 2], [3, 4]])}")
