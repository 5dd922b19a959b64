# core/supermatrix.py
"""
(p|q)-graded square matrices over a Grassmann-valued ring.

Entries may be GrassmannElement or SuperPolynomial; every operation only
relies on ring arithmetic plus zero_like/one_like. Berezinian quantities
(sdet, inverse) need nilpotent souls and therefore GrassmannElement entries.

Depends on: core.grassmann, core.polynomial
"""

import logging
import random
from itertools import permutations
from typing import Any, Callable, Dict, List, Optional, Sequence

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .grassmann import GrassmannAlgebra, GrassmannElement, as_coefficient
from .errors import GradingMismatchError, SingularBlockError

logger = logging.getLogger(__name__)


class Grading:
    """
    Grading (p|q): σ(i) = +1 for the first p indices, -1 for the last q
    """

    __slots__ = ('p', 'q')

    def __init__(self, p: int, q: int):
        if p < 0 or q < 0:
            raise ValueError(f"Invalid grading ({p}|{q})")
        self.p = p
        self.q = q

    @property
    def size(self) -> int:
        return self.p + self.q

    def sigma(self, i: int) -> int:
        return 1 if i < self.p else -1

    def epsilon(self, i: int) -> int:
        return 0 if i < self.p else 1

    def supertrace_of_identity(self) -> int:
        return self.p - self.q

    def __eq__(self, other):
        return isinstance(other, Grading) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self):
        return hash((self.p, self.q))

    def __repr__(self):
        return f"({self.p}|{self.q})"

    def to_dict(self) -> Dict[str, int]:
        return {'p': self.p, 'q': self.q}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Grading':
        return cls(int(data['p']), int(data['q']))


def _is_zero(value) -> bool:
    return value.is_zero() if hasattr(value, 'is_zero') else not value


def _leibniz_det(rows: List[List[Any]], one) -> Any:
    """Determinant of a matrix with mutually commuting entries"""
    n = len(rows)
    if n == 0:
        return one
    total = one.zero_like()
    for perm in permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = one
        for r, c in enumerate(perm):
            term = term * rows[r][c]
            if _is_zero(term):
                break
        if _is_zero(term):
            continue
        total = total - term if inversions & 1 else total + term
    return total


def _matmul(x: List[List[Any]], y: List[List[Any]], zero) -> List[List[Any]]:
    n, k, m = len(x), len(y), len(y[0]) if y else 0
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = zero
            for l in range(k):
                acc = acc + x[i][l] * y[l][j]
            row.append(acc)
        out.append(row)
    return out


def _body_inverse(rows: List[List[GrassmannElement]], block: str) -> List[List[Any]]:
    """Exact inverse of the numeric body of a square block"""
    n = len(rows)
    body = DomainMatrix([[rows[i][j].body() for j in range(n)] for i in range(n)], (n, n), QQ_I)
    if not body.det():
        raise SingularBlockError(f"Block {block} has a singular body", {'block': block})
    inv = body.inv().to_list()
    return inv


def _neumann_inverse(rows: List[List[GrassmannElement]], algebra: GrassmannAlgebra,
                     block: str) -> List[List[GrassmannElement]]:
    """
    X^{-1} = Σ_k (-X0^{-1} Xn)^k X0^{-1}, terminating because Xn is nilpotent
    """
    n = len(rows)
    if n == 0:
        return []
    inv0 = [[algebra.scalar(v) for v in row] for row in _body_inverse(rows, block)]
    soul = [[rows[i][j] - algebra.scalar(rows[i][j].body()) for j in range(n)] for i in range(n)]
    step = [[-v for v in row] for row in _matmul(inv0, soul, algebra.zero())]
    result = inv0
    term = inv0
    while True:
        term = _matmul(step, term, algebra.zero())
        if all(v.is_zero() for row in term for v in row):
            break
        result = [[result[i][j] + term[i][j] for j in range(n)] for i in range(n)]
    return result


class SuperMatrix:
    """
    Square supermatrix with block structure [[A, B], [C, D]]
    """

    def __init__(self, grading: Grading, entries: Sequence[Sequence[Any]]):
        size = grading.size
        if len(entries) != size or any(len(row) != size for row in entries):
            raise GradingMismatchError(f"Entries do not form a {size}x{size} grid for grading {grading}")
        self.grading = grading
        self.entries = [list(row) for row in entries]

    # --- constructors ----------------------------------------------------

    @classmethod
    def diagonal(cls, grading: Grading, values: Sequence[Any], template) -> 'SuperMatrix':
        zero = template.zero_like()
        size = grading.size
        rows = []
        for i in range(size):
            row = [zero] * size
            row[i] = zero + values[i]
            rows.append(row)
        return cls(grading, rows)

    @classmethod
    def identity(cls, grading: Grading, template) -> 'SuperMatrix':
        return cls.diagonal(grading, [1] * grading.size, template)

    @classmethod
    def zeros(cls, grading: Grading, template) -> 'SuperMatrix':
        return cls.diagonal(grading, [0] * grading.size, template)

    # --- structure -------------------------------------------------------

    @property
    def size(self) -> int:
        return self.grading.size

    def zero(self):
        return self.entries[0][0].zero_like()

    def one(self):
        return self.entries[0][0].one_like()

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def block(self, name: str) -> List[List[Any]]:
        p = self.grading.p
        rows = range(0, p) if name in ('A', 'B') else range(p, self.size)
        cols = range(0, p) if name in ('A', 'C') else range(p, self.size)
        return [[self.entries[i][j] for j in cols] for i in rows]

    def check_parity(self) -> bool:
        """Entry (i,j) must be homogeneous of degree ε(i)+ε(j) mod 2"""
        for i in range(self.size):
            for j in range(self.size):
                entry = self.entries[i][j]
                expected = (self.grading.epsilon(i) + self.grading.epsilon(j)) & 1
                if not entry.parities() <= {expected}:
                    return False
        return True

    def map_entries(self, fn: Callable[[Any], Any]) -> 'SuperMatrix':
        return SuperMatrix(self.grading, [[fn(v) for v in row] for row in self.entries])

    # --- arithmetic ------------------------------------------------------

    def _check(self, other: 'SuperMatrix'):
        if self.grading != other.grading:
            raise GradingMismatchError(f"Grading mismatch: {self.grading} vs {other.grading}")

    def __add__(self, other: 'SuperMatrix') -> 'SuperMatrix':
        self._check(other)
        return SuperMatrix(self.grading, [[a + b for a, b in zip(ra, rb)]
                                          for ra, rb in zip(self.entries, other.entries)])

    def __sub__(self, other: 'SuperMatrix') -> 'SuperMatrix':
        self._check(other)
        return SuperMatrix(self.grading, [[a - b for a, b in zip(ra, rb)]
                                          for ra, rb in zip(self.entries, other.entries)])

    def __neg__(self) -> 'SuperMatrix':
        return self.map_entries(lambda v: -v)

    def __mul__(self, other) -> 'SuperMatrix':
        if isinstance(other, SuperMatrix):
            self._check(other)
            return SuperMatrix(self.grading, _matmul(self.entries, other.entries, self.zero()))
        return self.map_entries(lambda v: v * other)

    def __rmul__(self, other) -> 'SuperMatrix':
        if hasattr(other, 'zero_like'):
            return self.map_entries(lambda v: other * v)
        return self.map_entries(lambda v: v * other)

    def __pow__(self, k: int) -> 'SuperMatrix':
        result = SuperMatrix.identity(self.grading, self.zero())
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, SuperMatrix) or self.grading != other.grading:
            return False
        return all(_is_zero(a - b) for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))

    def __hash__(self):
        return hash((self.grading, self.size))

    # --- supertrace, Berezinian ------------------------------------------

    def str(self):
        """Supertrace Σ σ(i) M_ii"""
        total = self.zero()
        for i in range(self.size):
            entry = self.entries[i][i]
            total = total + entry if self.grading.sigma(i) > 0 else total - entry
        return total

    def _require_grassmann(self, what: str) -> GrassmannAlgebra:
        entry = self.entries[0][0] if self.size else None
        if not isinstance(entry, GrassmannElement):
            raise TypeError(f"{what} needs GrassmannElement entries")
        return entry.algebra

    def sdet(self) -> GrassmannElement:
        """
        Superdeterminant det(A - B D^{-1} C) / det D
        """
        algebra = self._require_grassmann("sdet")
        a, b, c, d = (self.block(n) for n in 'ABCD')
        one = algebra.one()
        if a:
            _body_inverse(a, 'A')
        d_inv = _neumann_inverse(d, algebra, 'D')
        if b and c:
            correction = _matmul(_matmul(b, d_inv, algebra.zero()), c, algebra.zero())
            schur = [[a[i][j] - correction[i][j] for j in range(len(a))] for i in range(len(a))]
        else:
            schur = a
        det_d = _leibniz_det(d, one)
        return _leibniz_det(schur, one) * det_d.inverse()

    def inverse(self) -> 'SuperMatrix':
        """Inverse of an even supermatrix with invertible body blocks"""
        algebra = self._require_grassmann("inverse")
        for name in 'AD':
            blk = self.block(name)
            if blk:
                _body_inverse(blk, name)
        return SuperMatrix(self.grading, _neumann_inverse(self.entries, algebra, 'M'))

    def exp_nilpotent(self) -> 'SuperMatrix':
        """Terminating exponential of a supermatrix with nilpotent entries"""
        algebra = self._require_grassmann("exp")
        if any(v.body() for row in self.entries for v in row):
            raise ValueError("exp_nilpotent requires entries with zero body")
        result = SuperMatrix.identity(self.grading, algebra.zero())
        term = result
        k = 1
        while True:
            term = (term * self) * as_coefficient(QQ(1, k))
            if all(v.is_zero() for row in term.entries for v in row):
                break
            result = result + term
            k += 1
        return result

    def adjoint(self) -> 'SuperMatrix':
        """(X†)_ij = (X_ji)*"""
        size = self.size
        return SuperMatrix(self.grading, [[self.entries[j][i].conjugate() for j in range(size)]
                                          for i in range(size)])

    def is_hermitian(self) -> bool:
        return self == self.adjoint()

    def __repr__(self):
        rows = ["  [" + ", ".join(str(v) for v in row) + "]" for row in self.entries]
        return f"SuperMatrix{self.grading}(\n" + "\n".join(rows) + "\n)"


class ConvergenceMatrix(SuperMatrix):
    """
    I = diag(1,...,1, i,...,i): makes the Gaussian weight convergent
    """

    def __init__(self, grading: Grading, template):
        values = [QQ_I.one if grading.sigma(k) > 0 else QQ_I(0, 1) for k in range(grading.size)]
        base = SuperMatrix.diagonal(grading, values, template)
        super().__init__(grading, base.entries)
        self.template = template

    def dagger(self) -> SuperMatrix:
        values = [QQ_I.one if self.grading.sigma(k) > 0 else QQ_I(0, -1) for k in range(self.size)]
        return SuperMatrix.diagonal(self.grading, values, self.template)


def random_coefficient(rng: random.Random, span: int = 5, imaginary: bool = True):
    """Small random Gaussian rational"""
    re = QQ(rng.randint(-span, span), rng.randint(1, 3))
    im = QQ(rng.randint(-span, span), rng.randint(1, 3)) if imaginary else QQ(0)
    return QQ_I(re, im)


def random_grassmann(algebra: GrassmannAlgebra, parity: int, rng: random.Random,
                     generators: Optional[Sequence[int]] = None, body: bool = True,
                     density: float = 0.5) -> GrassmannElement:
    """
    Random homogeneous element built from single generators and their pair products

    Args:
        algebra: Target algebra
        parity: 0 for even, 1 for odd
        rng: Random source
        generators: Generator pool (defaults to all)
        body: Give even elements a nonzero body
        density: Probability of keeping each candidate monomial
    """
    pool = list(generators if generators is not None else range(algebra.generator_count))
    elem = algebra.zero()
    if parity == 0:
        if body:
            c = random_coefficient(rng)
            while not c:
                c = random_coefficient(rng)
            elem = elem + algebra.scalar(c)
        for a in range(len(pool)):
            for b in range(a + 1, len(pool)):
                if rng.random() < density:
                    elem = elem + algebra.monomial([pool[a], pool[b]], random_coefficient(rng))
    else:
        for a in pool:
            if rng.random() < density:
                elem = elem + algebra.monomial([a], random_coefficient(rng))
        if len(pool) >= 3 and rng.random() < density:
            trio = sorted(rng.sample(pool, 3))
            elem = elem + algebra.monomial(trio, random_coefficient(rng))
    return elem


def random_supermatrix(grading: Grading, algebra: GrassmannAlgebra, rng: random.Random,
                       generators: Optional[Sequence[int]] = None, body: bool = True,
                       density: float = 0.5) -> SuperMatrix:
    """Random even supermatrix; bosonic entries get nonzero bodies when body=True"""
    size = grading.size
    rows = []
    for i in range(size):
        row = []
        for j in range(size):
            parity = (grading.epsilon(i) + grading.epsilon(j)) & 1
            row.append(random_grassmann(algebra, parity, rng, generators, body, density))
        rows.append(row)
    return SuperMatrix(grading, rows)


def random_invertible_supermatrix(grading: Grading, algebra: GrassmannAlgebra, rng: random.Random,
                                  generators: Optional[Sequence[int]] = None) -> SuperMatrix:
    """Random even supermatrix whose A and D bodies are invertible"""
    while True:
        candidate = random_supermatrix(grading, algebra, rng, generators)
        try:
            for name in 'AD':
                blk = candidate.block(name)
                if blk:
                    _body_inverse(blk, name)
            return candidate
        except SingularBlockError:
            logger.debug("Rejected singular random supermatrix")


# Test the supermatrix layer
if __name__ == "__main__":
    logging.basicConfig(level=logging.DEBUG)

    rng = random.Random(7)
    algebra = GrassmannAlgebra(4)
    grading = Grading(2, 1)
    x = random_invertible_supermatrix(grading, algebra, rng)
    y = random_invertible_supermatrix(grading, algebra, rng)
    print(f"str(XY) - str(YX) = {(x * y).str() - (y * x).str()}")
    print(f"sdet(XY) - sdet X sdet Y = {(x * y).sdet() - x.sdet() * y.sdet()}")
