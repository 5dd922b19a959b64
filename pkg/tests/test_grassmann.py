# tests/test_grassmann.py
import pytest
import os
import random

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import sympy
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import QQ, QQ_I

from core.errors import CapExceededError, GradingMismatchError
from core.grassmann import (GrassmannAlgebra, as_coefficient, berezin_integral,
                            determinant_by_integral, monomial_product)
from core.supermatrix import random_grassmann


@pytest.fixture
def algebra():
    """Four generators with pairs (0,1) and (2,3)"""
    return GrassmannAlgebra(4, [(0, 1), (2, 3)])


class TestGrassmannAlgebra:
    def test_generators_anticommute(self, algebra):
        """Test θ_i θ_j = -θ_j θ_i and θ_i² = 0"""
        t0, t1 = algebra.generator(0), algebra.generator(1)
        assert t0 * t1 == -(t1 * t0)
        assert (t0 * t0).is_zero()

    def test_monomial_product_signs(self):
        """Test canonical ordering signs of monomial products"""
        assert monomial_product(0b01, 0b10) == (1, 0b11)
        assert monomial_product(0b10, 0b01) == (-1, 0b11)
        assert monomial_product(0b11, 0b01) == (0, 0)

    def test_generator_cap(self):
        """Test that oversized algebras are rejected"""
        with pytest.raises(CapExceededError):
            GrassmannAlgebra(65)

    def test_mismatched_algebras(self, algebra):
        """Test that elements of different algebras do not mix"""
        other = GrassmannAlgebra(2)
        with pytest.raises(GradingMismatchError):
            algebra.generator(0) + other.generator(0)

    def test_float_coefficients_rejected(self):
        """Test that inexact coefficients are refused"""
        with pytest.raises(TypeError):
            as_coefficient(0.5)
        assert as_coefficient("3/4") == QQ_I(QQ(3, 4), 0)

    def test_parity(self, algebra):
        """Test even/odd classification"""
        t0, t1, t2 = (algebra.generator(i) for i in range(3))
        assert (t0 * t1 + 3).is_even()
        assert (t0 + t0 * t1 * t2).is_odd()
        with pytest.raises(ValueError):
            (t0 + 1).degree_parity()

    def test_scalar_hash_matches_coefficient(self, algebra):
        """Test that scalars equal to a coefficient share its hash"""
        three = algebra.scalar(3)
        assert three == QQ_I(3, 0)
        assert hash(three) == hash(QQ_I(3, 0))
        assert hash(algebra.zero()) == hash(QQ_I.zero)
        assert {QQ_I(3, 0): 'c'}[three] == 'c'
        t0 = algebra.generator(0)
        assert hash(t0 * 2) == hash(algebra.generator(0) + algebra.generator(0))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6), st.integers(0, 1), st.integers(0, 1))
    def test_graded_commutativity(self, seed, pa, pb):
        """Test a b = (-1)^{|a||b|} b a on random homogeneous elements"""
        rng = random.Random(seed)
        algebra = GrassmannAlgebra(5)
        a = random_grassmann(algebra, pa, rng)
        b = random_grassmann(algebra, pb, rng)
        sign = -1 if pa and pb else 1
        assert a * b == (b * a) * sign


class TestCalculus:
    def test_berezin_basics(self, algebra):
        """Test ∫dθ θ = 1 and ∫dθ 1 = 0"""
        t0 = algebra.generator(0)
        assert berezin_integral(t0, [0]) == 1
        assert berezin_integral(algebra.one(), [0]).is_zero()

    def test_berezin_ordering(self, algebra):
        """Test that the innermost differential acts first"""
        t0, t1 = algebra.generator(0), algebra.generator(1)
        assert berezin_integral(t1 * t0, [0, 1]) == 1
        assert berezin_integral(t0 * t1, [0, 1]) == -1

    def test_repeated_integration_variable(self, algebra):
        """Test that a repeated differential is rejected"""
        with pytest.raises(ValueError):
            berezin_integral(algebra.generator(0), [0, 0])

    def test_left_derivative(self, algebra):
        """Test ∂/∂θ_1 (θ_0 θ_1) = -θ_0"""
        t0, t1 = algebra.generator(0), algebra.generator(1)
        assert (t0 * t1).left_derivative(1) == -t0
        assert (t0 * t1).left_derivative(2).is_zero()

    def test_inverse(self, algebra):
        """Test inverse of an element with invertible body"""
        t0, t1, t2, t3 = (algebra.generator(i) for i in range(4))
        a = algebra.scalar(2) + t0 * t1 + t2 * t3 * 5
        assert a * a.inverse() == 1
        with pytest.raises(ZeroDivisionError):
            (t0 * t1).inverse()

    def test_exp_nilpotent(self, algebra):
        """Test exp(θ0θ1 + θ2θ3) = (1 + θ0θ1)(1 + θ2θ3)"""
        t0, t1, t2, t3 = (algebra.generator(i) for i in range(4))
        left = (t0 * t1 + t2 * t3).exp_nilpotent()
        right = (1 + t0 * t1) * (1 + t2 * t3)
        assert left == right
        with pytest.raises(ValueError):
            (t0 * t1 + 1).exp_nilpotent()

    def test_conjugation(self, algebra):
        """Test (c θ_0)* = c* θ_1 and reversal of products"""
        t0, t1 = algebra.generator(0), algebra.generator(1)
        assert (t0 * QQ_I(0, 1)).conjugate() == t1 * QQ_I(0, -1)
        assert (t0 * t1).conjugate() == t0 * t1

    def test_determinant_by_integral(self):
        """Test the Berezin representation of a 2x2 determinant"""
        assert determinant_by_integral([[1, 2], [3, 4]]) == QQ_I(-2, 0)

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.integers(-4, 4), min_size=9, max_size=9))
    def test_determinant_matches_cofactor(self, entries):
        """Test Berezin determinant against sympy on random 3x3 integer matrices"""
        rows = [entries[0:3], entries[3:6], entries[6:9]]
        expected = int(sympy.Matrix(rows).det())
        assert determinant_by_integral(rows) == QQ_I(expected, 0)


if __name__ == "__main__":
    pytest.main([__file__])
