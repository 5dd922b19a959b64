# core/toprec.py
"""
Topological recursion on a solved genus-0 spectral curve.

Every ω_{g,n} with 2g-2+n > 0 is stored in the basis
    Π_k dz_k / (z_k - a_{b_k})^{d_k},   d_k >= 2
keyed by ((b_1, d_1), ..., (b_n, d_n)) where b indexes the branch points.
Residues at a branch point a are taken on local Laurent series in u, where
z = a + ρu and ρ is the distance from a to the nearest pole or other branch
point, so Taylor coefficients stay of order one. The sheet involution
σ(a + ρu) = a + ρs(u) is solved order by order from x(a + ρs) = x(a + ρu).
The kernel is

    K(z0, z) = ½ (1/(z0 - σ(z)) - 1/(z0 - z)) / ((y(z) - y(σ(z))) dx(z))

and F_g = 1/(2g-2) Σ_a Res Φ ω_{g,1} with dΦ = y dx, for g >= 2. Free
energies follow the ln Z sign convention, so the Gaussian curve gives
F_2 = -1/240.

Depends on: core.curve, core.errors, core.gaussian_oracle
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import combinations
from math import comb
from threading import Lock
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.polys.domains import QQ, QQ_I

from .curve import CurveSolver, CurveSpec, LaurentSeries, SpectralCurve, _pair
from .errors import CapExceededError, NonSimpleBranchPointError, SuperloopError, VerificationError

Key = Tuple[Tuple[int, int], ...]

# extended precision for local expansions; equals complex128 where the
# platform has no wider long double
_DTYPE = np.clongdouble


class LocalSeries:
    """
    Σ c_i ζ^{valuation+i}, known exactly below ζ^{precision}
    """

    __slots__ = ('valuation', 'coeffs', 'precision')

    def __init__(self, valuation: int, coeffs: Sequence[complex], precision: int):
        self.valuation = valuation
        self.precision = precision
        self.coeffs = np.asarray(coeffs, dtype=_DTYPE)[:max(0, precision - valuation)]

    @classmethod
    def taylor(cls, coeffs: Sequence[complex]) -> 'LocalSeries':
        return cls(0, coeffs, len(coeffs))

    @classmethod
    def monomial(cls, power: int, precision: int, coefficient: complex = 1.0) -> 'LocalSeries':
        return cls(power, [coefficient], precision)

    def stripped(self) -> 'LocalSeries':
        nonzero = np.flatnonzero(self.coeffs)
        if not len(nonzero):
            return LocalSeries(self.precision, [], self.precision)
        k = int(nonzero[0])
        return LocalSeries(self.valuation + k, self.coeffs[k:], self.precision)

    def __add__(self, other: 'LocalSeries') -> 'LocalSeries':
        v = min(self.valuation, other.valuation)
        p = min(self.precision, other.precision)
        out = np.zeros(max(0, p - v), dtype=_DTYPE)
        for s in (self, other):
            start = s.valuation - v
            count = min(len(s.coeffs), p - s.valuation)
            if count > 0:
                out[start:start + count] += s.coeffs[:count]
        return LocalSeries(v, out, p)

    def __neg__(self) -> 'LocalSeries':
        return LocalSeries(self.valuation, -self.coeffs, self.precision)

    def __sub__(self, other: 'LocalSeries') -> 'LocalSeries':
        return self + (-other)

    def __mul__(self, other) -> 'LocalSeries':
        if not isinstance(other, LocalSeries):
            return LocalSeries(self.valuation, self.coeffs * other, self.precision)
        v = self.valuation + other.valuation
        p = min(self.precision + other.valuation, other.precision + self.valuation)
        length = p - v
        if length <= 0 or not len(self.coeffs) or not len(other.coeffs):
            return LocalSeries(v, [], p)
        return LocalSeries(v, np.convolve(self.coeffs[:length], other.coeffs[:length])[:length], p)

    __rmul__ = __mul__

    def inverse(self) -> 'LocalSeries':
        s = self.stripped()
        if not len(s.coeffs):
            raise ZeroDivisionError("Series vanishes to its precision")
        length = s.precision - s.valuation
        c = np.zeros(length, dtype=_DTYPE)
        c[:len(s.coeffs)] = s.coeffs
        out = np.zeros(length, dtype=_DTYPE)
        out[0] = 1 / c[0]
        for n in range(1, length):
            out[n] = -np.dot(c[1:n + 1], out[n - 1::-1]) / c[0]
        return LocalSeries(-s.valuation, out, s.precision - 2 * s.valuation)

    def __pow__(self, k: int) -> 'LocalSeries':
        if k < 0:
            return self.inverse() ** (-k)
        result = LocalSeries.monomial(0, self.precision - self.valuation)
        for _ in range(k):
            result = result * self
        return result

    def derivative(self) -> 'LocalSeries':
        if self.valuation == 0:
            # the constant term has no ζ^{-1} image
            powers = np.arange(1, len(self.coeffs))
            return LocalSeries(0, self.coeffs[1:] * powers, self.precision - 1)
        powers = np.arange(self.valuation, self.valuation + len(self.coeffs))
        return LocalSeries(self.valuation - 1, self.coeffs * powers, self.precision - 1)

    def integral(self) -> 'LocalSeries':
        """Primitive vanishing at ζ = 0"""
        series = self.stripped() if self.valuation < 0 else self
        if series.valuation < 0:
            raise ValueError("Series has a pole")
        powers = np.arange(series.valuation + 1, series.valuation + 1 + len(series.coeffs))
        return LocalSeries(series.valuation + 1, series.coeffs / powers, series.precision + 1)

    def coefficient(self, power: int):
        if power >= self.precision:
            raise ArithmeticError(f"Coefficient of ζ^{power} lies beyond series precision {self.precision}")
        i = power - self.valuation
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else _DTYPE(0)

    def residue(self) -> complex:
        return self.coefficient(-1)

    def polar_part(self) -> np.ndarray:
        count = max(0, min(-self.valuation, len(self.coeffs)))
        return self.coeffs[:count]

    def __repr__(self):
        return f"LocalSeries(v={self.valuation}, prec={self.precision}, {self.coeffs[:4]}...)"


def compose(taylor: Sequence[complex], inner: LocalSeries) -> LocalSeries:
    """Σ t_k inner^k by Horner; inner must vanish at ζ = 0"""
    if inner.stripped().valuation < 1:
        raise ValueError("Inner series must vanish at the origin")
    acc = LocalSeries(0, [], inner.precision)
    for t in reversed(list(taylor)):
        acc = inner * acc + LocalSeries.monomial(0, inner.precision, t)
    return acc


def _pole_taylor(centers: np.ndarray, weights: np.ndarray, a, n: int, scale=1.0) -> np.ndarray:
    """Taylor coefficients in u of Σ w / (a + scale·u - c)"""
    out = np.zeros(n, dtype=_DTYPE)
    if not len(centers):
        return out
    gap = a - np.asarray(centers, dtype=_DTYPE)
    term = np.asarray(weights, dtype=_DTYPE) / gap
    ratio = -scale / gap
    for k in range(n):
        out[k] = np.sum(term)
        term = term * ratio
    return out


def _inverse_power_taylor(c, d: int, n: int, scale=1.0) -> np.ndarray:
    """Taylor coefficients in u of 1/(c + scale·u)^d"""
    c = _DTYPE(c)
    out = np.zeros(n, dtype=_DTYPE)
    term = c ** (-d)
    for k in range(n):
        out[k] = term
        term = term * (-(d + k) / (k + 1)) * scale / c
    return out


def _refine_branch_point(curve: SpectralCurve, a, steps: int = 3):
    """Newton steps on x'(z) = 0 in extended precision"""
    a = _DTYPE(a)
    if not len(curve.eta):
        return a
    eta = curve.eta.astype(_DTYPE)
    alpha = curve.alpha.astype(_DTYPE)
    for _ in range(steps):
        gap = a - eta
        slope = 1 - np.sum(alpha / gap ** 2)
        curvature = 2 * np.sum(alpha / gap ** 3)
        if curvature == 0:
            break
        a = a - slope / curvature
    return a


class BranchPoint:
    """
    Local data at a simple zero a of x'(z), in the coordinate z = a + scale·u
    """

    def __init__(self, curve: SpectralCurve, a: complex, depth: int, tol: float = 1e-9, scale: float = 1.0):
        self.a = _DTYPE(a)
        self.scale = rho = np.longdouble(scale)
        self.length = n = depth + 2
        self.x_taylor = _pole_taylor(curve.eta, curve.alpha, self.a, n, rho)
        self.y_taylor = -_pole_taylor(curve.xi, curve.beta, self.a, n, rho)
        for t in (self.x_taylor, self.y_taylor):
            t[0] += self.a
            t[1] += rho

        self.x2 = self.x_taylor[2]
        if abs(self.x2) < tol * rho ** 2:
            raise NonSimpleBranchPointError("x''(a) vanishes", {'a': _pair(self.a)})
        gap = self.x_taylor.copy()
        gap[0] = gap[1] = 0.0
        self.X = LocalSeries.taylor(gap)
        self.s = self._involution(gap, n)
        self.ds = self.s.derivative()

        self.Y = LocalSeries.taylor(self.y_taylor)
        y_gap = self.Y - compose(self.y_taylor, self.s)
        dX = self.X.derivative()
        denominator = (y_gap * dX).stripped()
        if denominator.valuation != 2 or abs(denominator.coeffs[0]) < tol * abs(self.x2) * rho:
            raise NonSimpleBranchPointError("y'(a) vanishes at a branch point", {'a': _pair(self.a)})
        self.kernel_denominator = denominator.inverse()
        self.phi = (self.Y * dX).integral()

        self._s_powers = [LocalSeries.monomial(0, 2 * n)]
        self._kernels: Dict[int, LocalSeries] = {}

    def _involution(self, gap: np.ndarray, n: int) -> LocalSeries:
        # s = -u + Σ c_k u^k; c_k cancels the u^{k+1} term of x(a+ρs) - x(a+ρu)
        coeffs = np.zeros(n - 1, dtype=_DTYPE)
        coeffs[0] = -1.0
        for order in range(2, n):
            partial = LocalSeries(1, coeffs[:order - 1], order + 2)
            mismatch = compose(gap[:order + 2], partial) - LocalSeries(0, gap[:order + 2], order + 2)
            coeffs[order - 1] = mismatch.coefficient(order + 1) / (2 * self.x2)
        return LocalSeries(1, coeffs, n)

    @property
    def y_prime(self) -> complex:
        return complex(self.y_taylor[1] / self.scale)

    @property
    def x_second(self) -> complex:
        return complex(2 * self.x2 / self.scale ** 2)

    def s_power(self, k: int) -> LocalSeries:
        while len(self._s_powers) <= k:
            self._s_powers.append(self._s_powers[-1] * self.s)
        return self._s_powers[k]

    def kernel(self, k: int) -> LocalSeries:
        """Coefficient of dz0/(z0-a)^{k+1} in K(z0, a+ρu)"""
        if k not in self._kernels:
            numerator = self.s_power(k) - LocalSeries.monomial(k, self.length + k)
            self._kernels[k] = numerator * self.kernel_denominator * (self.scale ** k / 2)
        return self._kernels[k]


class CorrelatorForm:
    """
    ω_{g,n} as Σ c Π_k dz_k/(z_k - a_{b_k})^{d_k}
    """

    def __init__(self, g: int, n: int, terms: Dict[Key, complex], points: Sequence[complex]):
        self.g = g
        self.n = n
        self.terms = terms
        self.points = list(points)

    def evaluate(self, zs: Sequence[complex]) -> complex:
        """Coefficient of dz_1...dz_n at the given points"""
        if len(zs) != self.n:
            raise ValueError(f"ω_({self.g},{self.n}) takes {self.n} arguments, got {len(zs)}")
        total = 0j
        for key, c in self.terms.items():
            term = c
            for z, (b, d) in zip(zs, key):
                term /= (z - self.points[b]) ** d
            total += term
        return complex(total)

    def max_order(self) -> int:
        return max((d for key in self.terms for _, d in key), default=0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'g': self.g,
            'n': self.n,
            'branch_points': [_pair(a) for a in self.points],
            'terms': [{'poles': [list(bd) for bd in key], 'c': _pair(c)}
                      for key, c in sorted(self.terms.items()) if abs(c) > 1e-15],
        }

    def __repr__(self):
        return f"CorrelatorForm(g={self.g}, n={self.n}, terms={len(self.terms)})"


class BergmanKernel(CorrelatorForm):
    """ω_{0,2}(z1, z2) = dz1 dz2 / (z1 - z2)^2"""

    def __init__(self, points: Sequence[complex] = ()):
        super().__init__(0, 2, {}, points)

    def evaluate(self, zs: Sequence[complex]) -> complex:
        z1, z2 = zs
        return complex(1 / (z1 - z2) ** 2)

    def to_dict(self) -> Dict[str, Any]:
        return {'g': 0, 'n': 2, 'closed_form': 'dz1 dz2 / (z1 - z2)^2'}


class FreeEnergyTable:
    """
    g → F_g, plus the Gaussian-normalized values for g != 1
    """

    def __init__(self, values: Dict[int, complex], normalized: Optional[Dict[int, complex]] = None):
        self.values = dict(values)
        self.normalized = dict(normalized or {})

    def __getitem__(self, g: int) -> complex:
        return self.values[g]

    def to_dict(self) -> Dict[str, Any]:
        rows = []
        for g in sorted(self.values):
            row = {'g': g, 'F': _pair(self.values[g])}
            if g in self.normalized:
                row['F_normalized'] = _pair(self.normalized[g])
            rows.append(row)
        return {'free_energies': rows}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'FreeEnergyTable':
        values, normalized = {}, {}
        for row in data['free_energies']:
            values[int(row['g'])] = complex(*row['F'])
            if 'F_normalized' in row:
                normalized[int(row['g'])] = complex(*row['F_normalized'])
        return cls(values, normalized)


def gaussian_volume_coefficient(g: int) -> float:
    """B_{2g} / (2g (2g-2)): F_g of the Gaussian curve at t = 1"""
    if g < 2:
        raise ValueError("Only defined for g >= 2")
    return float(sympy.bernoulli(2 * g) / (2 * g * (2 * g - 2)))


def gaussian_field_volume(spec: CurveSpec, g: int) -> complex:
    """
    Σ over fields of the Gaussian F_g at charge τ = ħb; (τ²/2) ln τ - 3τ²/4 for g = 0
    """
    total = 0j
    for _, b in spec.fields:
        tau = complex(spec.hbar * b)
        if g == 0:
            total += tau ** 2 / 2 * np.log(tau) - 0.75 * tau ** 2
        else:
            total += gaussian_volume_coefficient(g) * tau ** (2 - 2 * g)
    return complex(total)


def swap_xy(curve: SpectralCurve) -> SpectralCurve:
    """Exchange the roles of x and y (sources ↔ fields, ħ → -ħ)"""
    return curve.swapped()


class TopologicalRecursion:
    """
    Correlators and free energies of one spectral curve
    """

    def __init__(self, curve: SpectralCurve, config: Dict[str, Any] = None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)

        self.curve = curve
        self.g_cap = self.config.get('g_max', 3)
        self.n_cap = self.config.get('n_max', 3)
        self.jobs = self.config.get('jobs', 1)
        self.tol = self.config.get('branch_tolerance', 1e-9)
        self.depth = self.config.get('series_depth', 12 * self.g_cap + 4 * self.n_cap + 10)

        if curve.branch_points is None:
            curve.branch_points = CurveSolver(self.config).branch_points(curve)
        self.points = [_refine_branch_point(curve, z) for z, _ in curve.branch_points]
        self.branches = [BranchPoint(curve, a, self.depth, self.tol, self._local_scale(a)) for a in self.points]
        self._memo: Dict[Tuple[int, int], CorrelatorForm] = {}
        self._basis: Dict[Tuple[int, int, int, str], LocalSeries] = {}
        self._factors: Dict[Tuple[int, int, int, str], Dict[Key, LocalSeries]] = {}
        self._lock = Lock()

        self.logger.info(f"TopologicalRecursion initialized with {len(self.points)} branch points")

    def _local_scale(self, a) -> float:
        """Distance from a to the nearest pole of x or y, or other branch point"""
        others = [p for p in self.points if p is not a]
        gaps = np.abs(np.concatenate([self.curve.eta, self.curve.xi, np.asarray(others, dtype=complex)]) - complex(a))
        gaps = gaps[gaps > 0]
        return float(gaps.min()) if len(gaps) else 1.0

    # --- involution ----------------------------------------------------------

    def sheet_involution(self, z: complex, a: Optional[complex] = None) -> complex:
        """
        Companion root of x(w) = x(z) near the branch point a (nearest one by default)

        Raises:
            VerificationError: z is outside the validity neighborhood of a
        """
        if not self.points:
            raise VerificationError("Curve has no branch points", {'z': _pair(z)})
        z = complex(z)
        if a is None:
            a = min(self.points, key=lambda p: abs(p - z))
        curve = self.curve
        target = complex(curve.x(z))
        # (w - x(z)) Π(w - η_j) + Σ_j α_j Π_{l≠j}(w - η_l) = 0
        poly = np.polynomial.polynomial
        numerator = poly.polymul([-target, 1.0], poly.polyfromroots(curve.eta))
        for j in range(len(curve.eta)):
            numerator = poly.polyadd(numerator, curve.alpha[j] * poly.polyfromroots(np.delete(curve.eta, j)))
        roots = list(poly.polyroots(numerator))
        roots.pop(int(np.argmin([abs(r - z) for r in roots])))
        if not roots:
            raise VerificationError("No companion root", {'z': _pair(z)})
        mirror = 2 * a - z
        w = min(roots, key=lambda r: abs(r - mirror))
        if abs(z - a) > 0 and abs(w - a) > 2 * abs(z - a) + 1e-12:
            raise VerificationError("Point lies outside the involution's validity region",
                                    {'z': _pair(z), 'a': _pair(a)})
        for _ in range(2):
            slope = complex(curve.dx(w))
            if slope == 0:
                break
            w = w - (complex(curve.x(w)) - target) / slope
        return complex(w)

    # --- local expansions ----------------------------------------------------

    def _basis_series(self, ai: int, b: int, d: int, side: str) -> LocalSeries:
        """dz/(z - a_b)^d at z = a_ai + ρu (side 'z') or at σ(z) (side 's', includes s'), per du"""
        key = (ai, b, d, side)
        series = self._basis.get(key)
        if series is None:
            bp = self.branches[ai]
            n, rho = bp.length, bp.scale
            if b != ai:
                shifted = _inverse_power_taylor(bp.a - self.points[b], d, n, rho) * rho
            if side == 'z':
                if b == ai:
                    series = LocalSeries.monomial(-d, n - d, rho ** (1 - d))
                else:
                    series = LocalSeries.taylor(shifted)
            elif b == ai:
                series = bp.s ** (-d) * bp.ds * rho ** (1 - d)
            else:
                series = compose(shifted, bp.s) * bp.ds
            with self._lock:
                series = self._basis.setdefault(key, series)
        return series

    def _bergman_expansion(self, ai: int, side: str) -> Dict[Key, LocalSeries]:
        """ω_{0,2}(z, z_j) = Σ_k (k+1) ρ^{k+1} w^k dw dz_j/(z_j - a)^{k+2}, w = u or s(u)"""
        bp = self.branches[ai]
        out = {}
        for k in range(self.depth):
            weight = (k + 1) * bp.scale ** (k + 1)
            if side == 'z':
                series = LocalSeries.monomial(k, bp.length + k, weight)
            else:
                series = bp.s_power(k) * bp.ds * weight
            out[((ai, k + 2),)] = series
        return out

    def _bergman_diagonal(self, ai: int) -> LocalSeries:
        bp = self.branches[ai]
        return (LocalSeries.monomial(1, bp.length + 1) - bp.s) ** (-2) * bp.ds

    def _factor(self, ai: int, h: int, rest: int, side: str) -> Dict[Key, LocalSeries]:
        """ω_{h,1+rest} with its first argument expanded at z or σ(z)"""
        key = (ai, h, rest, side)
        cached = self._factors.get(key)
        if cached is not None:
            return cached
        if h == 0 and rest == 1:
            out = self._bergman_expansion(ai, side)
        else:
            out: Dict[Key, LocalSeries] = {}
            for poles, c in self._omega(h, 1 + rest).terms.items():
                series = self._basis_series(ai, poles[0][0], poles[0][1], side) * c
                tail = poles[1:]
                out[tail] = out[tail] + series if tail in out else series
        with self._lock:
            return self._factors.setdefault(key, out)

    # --- recursion -----------------------------------------------------------

    def _branch_terms(self, ai: int, g: int, jcount: int) -> Dict[Key, complex]:
        integrand: Dict[Key, LocalSeries] = {}

        def accumulate(key: Key, series: LocalSeries):
            integrand[key] = integrand[key] + series if key in integrand else series

        if g >= 1:
            if g == 1 and jcount == 0:
                accumulate((), self._bergman_diagonal(ai))
            else:
                for poles, c in self._omega(g - 1, jcount + 2).terms.items():
                    (b0, d0), (b1, d1) = poles[0], poles[1]
                    accumulate(poles[2:], self._basis_series(ai, b0, d0, 'z')
                               * self._basis_series(ai, b1, d1, 's') * c)

        positions = list(range(jcount))
        for h in range(g + 1):
            for size in range(jcount + 1):
                if (h == 0 and size == 0) or (h == g and size == jcount):
                    continue
                left = self._factor(ai, h, size, 'z')
                right = self._factor(ai, g - h, jcount - size, 's')
                for subset in combinations(positions, size):
                    others = [j for j in positions if j not in subset]
                    for lk, ls in left.items():
                        for rk, rs in right.items():
                            slots: List[Any] = [None] * jcount
                            for j, bd in zip(subset, lk):
                                slots[j] = bd
                            for j, bd in zip(others, rk):
                                slots[j] = bd
                            accumulate(tuple(slots), ls * rs)

        bp = self.branches[ai]
        terms: Dict[Key, complex] = {}
        for jkey, series in integrand.items():
            series = series.stripped()
            if series.valuation > 0:
                continue
            for k in range(1, 2 - series.valuation):
                r = (bp.kernel(k) * series).residue()
                if r:
                    key = ((ai, k + 1),) + jkey
                    terms[key] = terms.get(key, 0j) + r
        return terms

    def _parallel_map(self, fn, items: List[Any]) -> List[Any]:
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as executor:
                return list(executor.map(fn, items))
        return [fn(item) for item in items]

    def _omega(self, g: int, n: int) -> CorrelatorForm:
        key = (g, n)
        with self._lock:
            form = self._memo.get(key)
        if form is not None:
            return form

        jcount = n - 1
        # lower forms first, so branch workers only read the memo
        if g >= 1 and not (g == 1 and jcount == 0):
            self._omega(g - 1, jcount + 2)
        for h in range(g + 1):
            for size in range(jcount + 1):
                for hh, m in ((h, size), (g - h, jcount - size)):
                    if (hh, m) not in ((0, 0), (0, 1)) and (hh, m) != (g, jcount):
                        self._omega(hh, 1 + m)

        parts = self._parallel_map(lambda ai: self._branch_terms(ai, g, jcount), list(range(len(self.points))))
        terms: Dict[Key, complex] = {}
        for part in parts:
            for k, c in part.items():
                terms[k] = terms.get(k, 0j) + c
        form = CorrelatorForm(g, n, terms, self.points)
        self.logger.debug(f"ω_({g},{n}) computed with {len(terms)} terms")
        with self._lock:
            return self._memo.setdefault(key, form)

    def omega_gn(self, g: int, n: int) -> CorrelatorForm:
        """
        Correlation form ω_{g,n}

        Args:
            g: Genus (<= g_max)
            n: Number of arguments (<= n_max)

        Returns:
            CorrelatorForm (BergmanKernel for (0, 2))
        """
        if g < 0 or n < 1:
            raise ValueError(f"Invalid (g, n) = ({g}, {n})")
        if g > self.g_cap or n > self.n_cap:
            raise CapExceededError(f"ω_({g},{n}) exceeds caps g <= {self.g_cap}, n <= {self.n_cap}",
                                   {'g': g, 'n': n})
        if (g, n) == (0, 2):
            return BergmanKernel(self.points)
        if 2 * g - 2 + n < 1:
            raise ValueError(f"ω_({g},{n}) is not produced by the recursion")
        return self._omega(g, n)

    # --- checks ----------------------------------------------------------------

    def symmetry_check(self, g: int, n: int, samples: int = 10, seed: int = 0,
                       tol: float = 1e-8) -> Dict[str, Any]:
        """ω_{g,n} against argument permutations at random points"""
        form = self.omega_gn(g, n)
        rng = np.random.default_rng(seed)
        scale = 1 + max((abs(a) for a in self.points), default=0.0)
        worst = 0.0
        for _ in range(samples):
            zs = list(scale * (rng.normal(size=n) + 1j * rng.normal(size=n)))
            base = form.evaluate(zs)
            for i in range(n - 1):
                swapped = zs[:i] + [zs[i + 1], zs[i]] + zs[i + 2:]
                worst = max(worst, abs(form.evaluate(swapped) - base) / (1 + abs(base)))
        return {'g': g, 'n': n, 'max_relative_error': worst, 'holds': worst <= tol}

    def residue_check(self, g: int, tol: float = 1e-8) -> Dict[str, Any]:
        """
        At every branch point: Res ω_{g,1} = 0 and ω_{g,1}(z) + ω_{g,1}(σ(z)) has no pole
        """
        form = self.omega_gn(g, 1)
        rows = []
        for ai, bp in enumerate(self.branches):
            here = LocalSeries(0, [], bp.length)
            mirrored = LocalSeries(0, [], bp.length)
            for ((b, d),), c in form.terms.items():
                here = here + self._basis_series(ai, b, d, 'z') * c
                mirrored = mirrored + self._basis_series(ai, b, d, 's') * c
            scale = 1 + float(np.max(np.abs(here.polar_part()), initial=0.0))
            polar = (here + mirrored).polar_part()
            rows.append({
                'branch_point': _pair(bp.a),
                'residue': _pair(here.residue()),
                'symmetric_polar_part': float(np.max(np.abs(polar), initial=0.0)) / scale,
            })
        holds = all(abs(complex(*r['residue'])) <= tol and r['symmetric_polar_part'] <= tol for r in rows)
        return {'g': g, 'rows': rows, 'holds': holds}

    # --- free energies and resolvents ---------------------------------------

    def free_energy(self, g: int) -> complex:
        """
        F_g of the curve, with x(z) ~ z at infinity

        F_0 is the planar pairing of y dx with its primitive, F_1 is
        -(1/24) [Σ_a ln(x''(a) y'(a)) + 3 Σ_j ln α_j], higher genera come from
        ω_{g,1}. The Gaussian curve of charge t gives (t²/2) ln t - 3t²/4,
        -(1/12) ln t up to a constant, and B_{2g} t^{2-2g} / (2g (2g-2)).
        """
        if g > self.g_cap:
            raise CapExceededError(f"g = {g} exceeds cap {self.g_cap}", {'g': g})
        if g < 0:
            raise ValueError(f"Invalid genus {g}")
        if g == 0:
            return self._planar_free_energy()
        if g == 1:
            total = sum(np.log(bp.x_second * bp.y_prime) for bp in self.branches)
            total += 3 * np.sum(np.log(self.curve.alpha.astype(complex)))
            return complex(-total / 24)
        form = self._omega(g, 1)
        total = _DTYPE(0)
        for ai, bp in enumerate(self.branches):
            for ((b, d),), c in form.terms.items():
                total += c * (self._basis_series(ai, b, d, 'z') * bp.phi).residue()
        return complex(total / (2 * g - 2))

    def _planar_free_energy(self) -> complex:
        # y dx = (z + Σ r/(z-ξ) + Σ [s/(z-η) + q/(z-η)²]) dz, paired at ∞, η_j, ξ_i
        curve = self.curve
        xi, eta, alpha = curve.xi, curve.eta, curve.alpha
        r = np.array([-b * complex(curve.dx(z)) for z, b in zip(xi, curve.beta)], dtype=complex)
        s = np.array([-a * complex(curve.dy(z)) for z, a in zip(eta, alpha)], dtype=complex)
        y_at = np.array([complex(curve.y(z)) for z in eta], dtype=complex)
        q = -alpha * y_at

        def moment(weights, centers, k):
            return complex(np.sum(weights * centers ** (k - 1))) if len(centers) else 0j

        def c(k):
            value = moment(r, xi, k) + moment(s, eta, k)
            if k >= 2 and len(eta):
                value += complex(np.sum(q * (k - 1) * eta ** (k - 2)))
            return value

        a1, a3 = moment(alpha, eta, 1), moment(alpha, eta, 3)
        residues = -(c(3) + 2 * a1 * c(1) + 2 * a3 + a1 ** 2) / 2
        t_inf = -complex(np.sum(r)) - complex(np.sum(s))
        pairing = t_inf * complex(np.sum(alpha))

        for j, e in enumerate(eta):
            others = np.arange(len(eta)) != j
            gap = e - eta[others]
            x_reg = e + np.sum(alpha[others] / gap)
            x_slope = 1 - np.sum(alpha[others] / gap ** 2)
            y_reg = (e + np.sum(r / (e - xi))
                     + np.sum(s[others] / gap + q[others] / gap ** 2))
            residues += y_at[j] * (alpha[j] * y_reg + x_reg * s[j] + x_slope * q[j])
            primitive = (e ** 2 / 2 + np.sum(r * np.log(e - xi))
                         + np.sum(s[others] * np.log(gap) - q[others] / gap))
            pairing += s[j] * (-primitive + y_at[j] * x_reg - s[j] * np.log(alpha[j] + 0j))

        for i, z in enumerate(xi):
            others = np.arange(len(xi)) != i
            primitive = (z ** 2 / 2 + np.sum(r[others] * np.log(z - xi[others]))
                         + np.sum(s * np.log(z - eta) - q / (z - eta)))
            pairing += r[i] * (-primitive + r[i] * np.log(complex(curve.dx(z))))

        return complex(-(residues + pairing) / 2)

    def free_energies(self, g_max: Optional[int] = None) -> FreeEnergyTable:
        """
        F_0..F_{g_max}; normalized values subtract each field's Gaussian volume (not for F_1)
        """
        g_max = self.g_cap if g_max is None else g_max
        values, normalized = {}, {}
        for g in range(0, g_max + 1):
            values[g] = self.free_energy(g)
            if g != 1:
                normalized[g] = values[g] - gaussian_field_volume(self.curve.spec, g)
        return FreeEnergyTable(values, normalized)

    def resolvent_expansion(self, g: int, kmax: int) -> List[complex]:
        """
        Genus-g coefficients c_k of W(x) = Σ_k c_k x^{-k-1}, read at z = ∞
        """
        if g == 0:
            return CurveSolver(self.config).planar_moments(self.curve, kmax)
        form = self._omega(g, 1)
        length = kmax + form.max_order() + 6
        x, _, _ = self.curve.expansion_at_infinity(length)
        coeffs = np.zeros(length, dtype=complex)
        for ((b, d),), c in form.terms.items():
            a = self.points[b]
            for m in range(length - d + 2):
                coeffs[d - 2 + m] += c * comb(d + m - 1, m) * a ** m
        omega = LaurentSeries(-2, coeffs)
        out = []
        power = LaurentSeries.from_entries(0, length, {0: 1.0})
        for _ in range(kmax + 1):
            out.append((power * omega).at(-1))
            power = power * x
        return out


def _exact(value: complex):
    """Nearby Gaussian rational for the exact oracle"""
    re = Fraction(value.real).limit_denominator(10 ** 6)
    im = Fraction(value.imag).limit_denominator(10 ** 6)
    return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))


def _expand_multiplicities(points: Sequence[Tuple[complex, int]]) -> Tuple[List[Any], int, int]:
    plus = [_exact(z) for z, k in points if k > 0 for _ in range(k)]
    minus = [_exact(z) for z, k in points if k < 0 for _ in range(-k)]
    return plus + minus, len(plus), len(minus)


class DualityChecker:
    """
    Free-energy comparison of a curve with its x ↔ y swap, plus the exact oracle
    """

    def __init__(self, config: Dict[str, Any] = None, solver: Optional[CurveSolver] = None, oracle=None):
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.solver = solver or CurveSolver(self.config)
        self.oracle = oracle
        self.g_max = self.config.get('g_max', 3)
        self.tol = self.config.get('duality_tolerance', 1e-8)
        self.logger.info("DualityChecker initialized")

    def _oracle_comparison(self, spec: CurveSpec) -> Dict[str, Any]:
        if self.oracle is None:
            from .gaussian_oracle import GaussianOracle
            self.oracle = GaussianOracle(self.config)
        xs, m, n = _expand_multiplicities(spec.sources)
        ys, p, q = _expand_multiplicities(spec.fields)
        sizes = {'m': m, 'n': n, 'p': p, 'q': q}
        if not self.oracle.is_closed(m, n, p, q):
            return {'sizes': sizes, 'computed': False, 'reason': 'series does not terminate'}
        hbar = _exact(complex(spec.hbar))
        order = max(1, (m + n) * (p + q))
        try:
            z = self.oracle.partition_oracle(m, n, p, q, xs, ys, hbar, order).value()
            dual = self.oracle.partition_oracle(p, q, m, n, ys, xs, -hbar, order).value()
        except (SuperloopError, ZeroDivisionError) as e:
            return {'sizes': sizes, 'computed': False, 'reason': str(e)}
        expected = QQ_I(-1, 0) if ((m - n) * (p - q)) & 1 else QQ_I.one
        ratio = z / dual if dual else None
        return {'sizes': sizes, 'computed': True, 'z': z, 'z_dual': dual, 'ratio': ratio,
                'expected_ratio': expected, 'matches': ratio is not None and ratio == expected}

    def duality_report(self, spec: CurveSpec, g_max: Optional[int] = None, tol: Optional[float] = None,
                       with_oracle: bool = True) -> Dict[str, Any]:
        """
        Per-genus |F_g(E) - F_g(swap E)| for g = 2..g_max

        Deltas are taken on the Gaussian-normalized free energies; raw deltas are
        reported alongside. F_0 and F_1 agree only up to a polynomial in the
        charges and a constant, so their differences are reported, not asserted.
        """
        g_max = self.g_max if g_max is None else g_max
        tol = self.tol if tol is None else tol
        curve = self.solver.solve_rational_curve(spec)
        dual_spec = CurveSpec(-spec.hbar, sources=spec.fields, fields=spec.sources)
        dual = self.solver.solve_rational_curve(dual_spec)
        swapped = curve.swapped()
        swap_gap = max((float(np.max(np.abs(u - v))) for u, v in
                        ((dual.xi, swapped.xi), (dual.eta, swapped.eta),
                         (dual.alpha, swapped.alpha), (dual.beta, swapped.beta)) if len(u)), default=0.0)

        config = {**self.config, 'g_max': max(g_max, 1)}
        table = TopologicalRecursion(curve, config).free_energies(g_max)
        dual_table = TopologicalRecursion(dual, config).free_energies(g_max)
        rows = []
        for g in range(2, g_max + 1):
            delta = abs(table.normalized[g] - dual_table.normalized[g])
            rows.append({
                'g': g,
                'F': _pair(table[g]), 'F_dual': _pair(dual_table[g]),
                'F_normalized': _pair(table.normalized[g]), 'F_dual_normalized': _pair(dual_table.normalized[g]),
                'delta_raw': float(abs(table[g] - dual_table[g])),
                'delta': float(delta),
                'passed': bool(delta < tol),
            })
        report: Dict[str, Any] = {
            'spec': spec.to_dict(),
            'g_max': g_max,
            'tolerance': tol,
            'swap_consistency': swap_gap,
            'rows': rows,
            'F0': {'F': _pair(table[0]), 'F_dual': _pair(dual_table[0]),
                   'difference': _pair(table[0] - dual_table[0]),
                   'normalized_difference': _pair(table.normalized[0] - dual_table.normalized[0])},
            'F1': {'F': _pair(table[1]), 'F_dual': _pair(dual_table[1]),
                   'difference': _pair(table[1] - dual_table[1])},
            'holds': all(r['passed'] for r in rows),
        }
        if with_oracle:
            report['oracle'] = self._oracle_comparison(spec)
        self.logger.info(f"Duality report: holds={report['holds']}, max delta="
                         f"{max((r['delta'] for r in rows), default=0.0):.2e}")
        return report


# Test the recursion
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    solver = CurveSolver()
    gauss = solver.solve_rational_curve(CurveSpec(1.0, fields=[(0.0, 1)]))
    recursion = TopologicalRecursion(gauss)
    print(f"ω_(1,1)(2) = {recursion.omega_gn(1, 1).evaluate([2.0])} (expected {8 / 81})")
    print(f"F_2 = {recursion.free_energy(2)} (expected {-1 / 240})")
    print(f"genus-1 resolvent: {recursion.resolvent_expansion(1, 6)}")
