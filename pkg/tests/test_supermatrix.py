# tests/test_supermatrix.py
import pytest
import os
import random

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from hypothesis import given, settings, strategies as st
from sympy.polys.domains import QQ, QQ_I

from core.errors import GradingMismatchError, SingularBlockError
from core.grassmann import GrassmannAlgebra
from core.supermatrix import (ConvergenceMatrix, Grading, SuperMatrix, random_invertible_supermatrix,
                              random_supermatrix)


@pytest.fixture
def algebra():
    return GrassmannAlgebra(4)


class TestGrading:
    def test_signs(self):
        """Test σ and ε on (2|1)"""
        grading = Grading(2, 1)
        assert [grading.sigma(i) for i in range(3)] == [1, 1, -1]
        assert [grading.epsilon(i) for i in range(3)] == [0, 0, 1]
        assert grading.supertrace_of_identity() == 1

    def test_round_trip(self):
        """Test to_dict/from_dict"""
        assert Grading.from_dict(Grading(1, 2).to_dict()) == Grading(1, 2)

    def test_invalid(self):
        """Test negative block sizes"""
        with pytest.raises(ValueError):
            Grading(-1, 0)


class TestSuperMatrix:
    def test_diagonal_sdet(self, algebra):
        """Test sdet diag(2, 3 | 5) = 6/5"""
        m = SuperMatrix.diagonal(Grading(2, 1), [2, 3, 5], algebra.zero())
        assert m.sdet() == QQ_I(QQ(6, 5), 0)
        assert m.str() == QQ_I(0, 0)

    def test_supertrace_of_identity(self, algebra):
        """Test str 1 = p - q"""
        assert SuperMatrix.identity(Grading(1, 3), algebra.zero()).str() == -2

    def test_bad_shape(self, algebra):
        """Test that entries must match the grading"""
        with pytest.raises(GradingMismatchError):
            SuperMatrix(Grading(1, 1), [[algebra.one()]])

    def test_grading_mismatch(self, algebra):
        """Test that products across gradings are refused"""
        a = SuperMatrix.identity(Grading(1, 1), algebra.zero())
        b = SuperMatrix.identity(Grading(2, 0), algebra.zero())
        with pytest.raises(GradingMismatchError):
            a * b

    def test_singular_block(self, algebra):
        """Test sdet with a non-invertible bosonic block"""
        m = SuperMatrix.diagonal(Grading(1, 1), [0, 1], algebra.zero())
        with pytest.raises(SingularBlockError):
            m.sdet()

    def test_convergence_matrix(self, algebra):
        """Test I = diag(1 | i) and I† = diag(1 | -i)"""
        conv = ConvergenceMatrix(Grading(1, 1), algebra.zero())
        assert conv[1, 1] == QQ_I(0, 1)
        assert conv.dagger()[1, 1] == QQ_I(0, -1)
        assert conv * conv.dagger() == SuperMatrix.identity(Grading(1, 1), algebra.zero())

    def test_identity_is_hermitian(self, algebra):
        """Test adjoint of the identity"""
        assert SuperMatrix.identity(Grading(2, 1), algebra.zero()).is_hermitian()

    def test_random_matrices_have_graded_entries(self, algebra):
        """Test parity of random even supermatrices"""
        rng = random.Random(3)
        assert random_supermatrix(Grading(2, 1), algebra, rng).check_parity()


class TestIdentities:
    @pytest.mark.parametrize("grading", [Grading(1, 1), Grading(2, 1)])
    def test_sdet_multiplicative(self, grading):
        """Test sdet(XY) = sdet X sdet Y on 100 random matrices"""
        rng = random.Random(11)
        algebra = GrassmannAlgebra(4)
        for _ in range(50):
            x = random_invertible_supermatrix(grading, algebra, rng)
            y = random_invertible_supermatrix(grading, algebra, rng)
            assert (x * y).sdet() == x.sdet() * y.sdet()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6))
    def test_sdet_exp_is_exp_str(self, seed):
        """Test sdet(exp M) = exp(str M) for nilpotent M"""
        rng = random.Random(seed)
        algebra = GrassmannAlgebra(4)
        m = random_supermatrix(Grading(2, 1), algebra, rng, body=False)
        assert m.exp_nilpotent().sdet() == m.str().exp_nilpotent()

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6))
    def test_supertrace_cyclic(self, seed):
        """Test str(XY) = str(YX)"""
        rng = random.Random(seed)
        algebra = GrassmannAlgebra(4)
        x = random_supermatrix(Grading(1, 2), algebra, rng)
        y = random_supermatrix(Grading(1, 2), algebra, rng)
        assert (x * y).str() == (y * x).str()

    def test_inverse(self):
        """Test X X^{-1} = 1 and sdet(X^{-1}) = 1/sdet X"""
        rng = random.Random(5)
        algebra = GrassmannAlgebra(4)
        x = random_invertible_supermatrix(Grading(2, 1), algebra, rng)
        inverse = x.inverse()
        assert x * inverse == SuperMatrix.identity(Grading(2, 1), algebra.zero())
        assert inverse.sdet() * x.sdet() == 1


if __name__ == "__main__":
    pytest.main([__file__])
