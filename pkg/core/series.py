# core/series.py
"""
Truncated multivariate formal power series.

Coefficients are any ring values (QQ_I, GrassmannElement, SuperPolynomial);
the series only needs +, * and a zero test. Truncation is on total degree.

Depends on: core.grassmann
"""

import logging
from math import factorial
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import sympy
from sympy.polys.domains import QQ, QQ_I

from .grassmann import as_coefficient

Exponents = Tuple[int, ...]

logger = logging.getLogger(__name__)


def _is_zero(value) -> bool:
    return value.is_zero() if hasattr(value, 'is_zero') else not value


class FormalSeries:
    """
    Σ c_e u^e truncated at total degree `order`
    """

    def __init__(self, variables: Sequence[str], order: int, terms: Dict[Exponents, Any] = None,
                 unit: Any = None):
        if order < 0:
            raise ValueError(f"Truncation order must be non-negative, got {order}")
        self.variables = tuple(variables)
        self.order = order
        self.unit = unit if unit is not None else QQ_I.one
        self.terms = {e: c for e, c in (terms or {}).items()
                      if sum(e) <= order and not _is_zero(c)}

    # --- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, variables: Sequence[str], order: int, value, unit=None) -> 'FormalSeries':
        return cls(variables, order, {(0,) * len(variables): value}, unit)

    @classmethod
    def monomial(cls, variables: Sequence[str], order: int, exps: Exponents, coefficient,
                 unit=None) -> 'FormalSeries':
        return cls(variables, order, {tuple(exps): coefficient}, unit)

    def zero_like(self) -> 'FormalSeries':
        return FormalSeries(self.variables, self.order, {}, self.unit)

    def _like(self, terms: Dict[Exponents, Any]) -> 'FormalSeries':
        return FormalSeries(self.variables, self.order, terms, self.unit)

    # --- structure -------------------------------------------------------

    def _zero(self):
        return self.unit - self.unit

    def coefficient(self, exps: Sequence[int]):
        return self.terms.get(tuple(exps), self._zero())

    def constant_term(self):
        return self.coefficient((0,) * len(self.variables))

    def is_zero(self) -> bool:
        return not self.terms

    def degree_part(self, degree: int) -> Dict[Exponents, Any]:
        return {e: c for e, c in self.terms.items() if sum(e) == degree}

    # --- arithmetic ------------------------------------------------------

    def _check(self, other: 'FormalSeries'):
        if self.variables != other.variables:
            raise ValueError(f"Series variables differ: {self.variables} vs {other.variables}")

    def __add__(self, other):
        if not isinstance(other, FormalSeries):
            other = FormalSeries.constant(self.variables, self.order, self.unit * other, self.unit)
        self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        out = FormalSeries(self.variables, min(self.order, other.order), terms, self.unit)
        return out

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            return self._like({e: c * other for e, c in self.terms.items()})
        self._check(other)
        order = min(self.order, other.order)
        terms: Dict[Exponents, Any] = {}
        for ea, ca in self.terms.items():
            da = sum(ea)
            for eb, cb in other.terms.items():
                if da + sum(eb) > order:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                terms[e] = terms[e] + prod if e in terms else prod
        return FormalSeries(self.variables, order, terms, self.unit)

    def __rmul__(self, other):
        return self._like({e: other * c for e, c in self.terms.items()})

    def exp(self) -> 'FormalSeries':
        """
        exp of a series with zero constant term, truncated at self.order
        """
        if not _is_zero(self.constant_term()):
            raise ValueError("exp requires a series with zero constant term")
        result = FormalSeries.constant(self.variables, self.order, self.unit, self.unit)
        power = result
        for k in range(1, self.order + 1):
            power = power * self
            if power.is_zero():
                break
            result = result + power * as_coefficient(QQ(1, factorial(k)))
        return result

    def map_coefficients(self, fn: Callable[[Any], Any], unit=None) -> 'FormalSeries':
        return FormalSeries(self.variables, self.order,
                            {e: fn(c) for e, c in self.terms.items()},
                            unit if unit is not None else self.unit)

    def evaluate(self, values: Dict[str, Any]):
        """Exact Σ c_e Π v^e (the truncated polynomial)"""
        total = None
        for e, c in self.terms.items():
            term = c
            for name, k in zip(self.variables, e):
                if k:
                    term = term * as_coefficient(values[name]) ** k
            total = term if total is None else total + term
        if total is None:
            return self._zero()
        return total

    def __eq__(self, other):
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((self.variables, self.order))

    def to_sympy(self) -> 'sympy.Expr':
        """Sympy expression of a series with QQ_I coefficients"""
        syms = [sympy.Symbol(name) for name in self.variables]
        expr = sympy.Integer(0)
        for e, c in self.terms.items():
            mono = sympy.Integer(1)
            for s, k in zip(syms, e):
                mono *= s ** k
            expr += QQ_I.to_sympy(c) * mono
        return sympy.expand(expr)

    def __repr__(self):
        return f"FormalSeries({self.variables}, order={self.order}, terms={len(self.terms)})"


class PartitionSeries:
    """
    Π_i x_i^{e_i} · S(u_1, ..., u_k) with u_i = 1/x_i, plus a symbolic normalization

    The normalization is the Gaussian volume the series was divided by.
    """

    def __init__(self, series: FormalSeries, x_exponents: Sequence[Any],
                 normalization: Optional['sympy.Expr'] = None, closed: bool = False,
                 source_values: Optional[Sequence[Any]] = None):
        self.series = series
        self.x_exponents = list(x_exponents)
        self.normalization = normalization if normalization is not None else sympy.Integer(1)
        self.closed = closed
        self.source_values = list(source_values) if source_values is not None else None

    def evaluate(self, x_values: Sequence[Any]):
        """
        Exact value at source points; only meaningful when the series is closed
        """
        if len(x_values) != len(self.x_exponents):
            raise ValueError("Number of source values does not match the series")
        u_values = {}
        prefactor = QQ_I.one
        for name, x, e in zip(self.series.variables, x_values, self.x_exponents):
            x = as_coefficient(x)
            if not x:
                raise ZeroDivisionError("Source value must be nonzero")
            u_values[name] = QQ_I.one / x
            if int(e) != e:
                raise ValueError(f"Non-integer prefactor exponent {e} cannot be evaluated exactly")
            prefactor = prefactor * x ** int(e) if int(e) >= 0 else prefactor / x ** (-int(e))
        return prefactor * self.series.evaluate(u_values)

    def value(self):
        """Value at the stored source points"""
        if self.source_values is None:
            raise ValueError("No source values attached to this series")
        if not self.closed:
            logger.warning("Evaluating a truncated (non-closed) partition series")
        return self.evaluate(self.source_values)

    def to_dict(self) -> Dict[str, Any]:
        coefficients = [{'exponents': list(e), 'value': c}
                        for e, c in sorted(self.series.terms.items())]
        data = {
            'variables': list(self.series.variables),
            'order': self.series.order,
            'x_exponents': self.x_exponents,
            'normalization': str(self.normalization),
            'closed': self.closed,
            'coefficients': coefficients,
        }
        if self.source_values is not None:
            data['source_values'] = self.source_values
            if self.closed:
                data['value'] = self.value()
        return data

    def __repr__(self):
        return (f"PartitionSeries(exponents={self.x_exponents}, closed={self.closed}, "
                f"normalization={self.normalization})")
