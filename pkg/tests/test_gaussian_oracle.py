# tests/test_gaussian_oracle.py
import pytest
import os

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from sympy.polys.domains import QQ, QQ_I

from core.errors import CapExceededError
from core.fatgraph import FatgraphEngine
from core.gaussian_oracle import GaussianOracle
from core.supermatrix import Grading


@pytest.fixture
def oracle():
    return GaussianOracle({'oracle_size_cap': 3, 'partition_size_cap': 3, 'truncation_order': 4})


class TestMoments:
    def test_two_point_function(self, oracle):
        """Test ⟨N_01 N_10⟩ = ħ on (2|0)"""
        value = oracle.gaussian_moment_oracle(lambda m: m[0, 1] * m[1, 0], Grading(2, 0), 3)
        assert value == QQ_I(3, 0)

    def test_odd_moment_vanishes(self, oracle):
        value = oracle.gaussian_moment_oracle(lambda m: m[0, 0] * m[0, 0] * m[0, 0], Grading(1, 0), 1)
        assert value == QQ_I.zero

    def test_quadratic_trace(self, oracle):
        """Test ⟨(1/ħ) str N²⟩ = 1 + y²/ħ on (1|0)"""
        assert oracle.moment([2], Grading(1, 0), 1) == QQ_I.one
        assert oracle.moment([2], Grading(1, 0), 1, [2]) == QQ_I(5, 0)
        assert oracle.moment([2], Grading(1, 0), 2, [2]) == QQ_I(3, 0)

    def test_super_quartic(self, oracle):
        """Test ⟨(1/ħ) str M⁴⟩ = 3 on (2|1) at ħ = 1"""
        assert oracle.moment([4], Grading(2, 1), 1) == QQ_I(3, 0)

    def test_zero_hbar(self, oracle):
        with pytest.raises(ZeroDivisionError):
            oracle.moment([2], Grading(1, 0), 0)

    def test_size_cap(self, oracle):
        """Test that oversized gradings are refused"""
        with pytest.raises(CapExceededError):
            oracle.moment([2], Grading(2, 2), 1)

    @pytest.mark.parametrize("valencies", [[1], [2], [1, 1], [3], [2, 1]])
    @pytest.mark.parametrize("grading,y_values", [
        (Grading(1, 1), ["1/2", 2]),
        (Grading(2, 1), [1, 3, -1]),
    ])
    def test_three_routes_agree(self, oracle, valencies, grading, y_values):
        """Test direct integration, the index sum and the topological polynomial"""
        engine = FatgraphEngine()
        hbar = QQ_I(QQ(2, 3), 0)
        direct = oracle.moment(valencies, grading, hbar, y_values)
        assert engine.moment_indexsum(valencies, grading, y_values, hbar) == direct
        assert engine.specialize(engine.moment_polynomial(valencies), grading, y_values, hbar) == direct

    @pytest.mark.parametrize("valencies", [[4], [2, 2], [3, 1], [6], [4, 2], [3, 3], [2, 2, 2], [3, 2, 1]])
    @pytest.mark.parametrize("grading,y_values", [
        (Grading(1, 1), [2, "-1/2"]),
        (Grading(2, 1), [1, 3, -1]),
        (Grading(1, 2), ["1/3", 2, -1]),
    ])
    def test_three_routes_agree_up_to_six(self, oracle, valencies, grading, y_values):
        """Test the three routes with total valency up to six, including (1|2)"""
        engine = FatgraphEngine()
        hbar = QQ_I(QQ(3, 4), 0)
        direct = oracle.moment(valencies, grading, hbar, y_values)
        assert engine.moment_indexsum(valencies, grading, y_values, hbar) == direct
        assert engine.specialize(engine.moment_polynomial(valencies), grading, y_values, hbar) == direct


class TestPartitionFunctions:
    def test_is_closed(self):
        assert GaussianOracle.is_closed(1, 0, 1, 0)
        assert GaussianOracle.is_closed(2, 0, 1, 0)
        assert not GaussianOracle.is_closed(1, 0, 0, 1)
        assert GaussianOracle.is_closed(0, 1, 0, 2)

    def test_single_characteristic_polynomial(self, oracle):
        """Test ⟨x - N⟩ = x - y"""
        z = oracle.partition_oracle(1, 0, 1, 0, [3], [1], 1)
        assert z.closed
        assert z.value() == QQ_I(2, 0)

    def test_two_sources(self, oracle):
        """Test ⟨det(x - N)⟩ = (x - y1)(x - y2) - ħ on (2|0)"""
        z = oracle.partition_oracle(1, 0, 2, 0, [3], [1, 0], 1)
        assert z.value() == QQ_I(5, 0)

    def test_source_count_checked(self, oracle):
        with pytest.raises(ValueError):
            oracle.partition_oracle(1, 0, 1, 0, [3, 4], [1], 1)

    def test_partition_cap(self, oracle):
        with pytest.raises(CapExceededError):
            oracle.partition_oracle(2, 2, 1, 0)

    def test_exp_source_identity(self, oracle):
        """Test ⟨exp(str NY)⟩ = exp((ħ/2) str Y²)"""
        assert oracle.exp_source_identity(Grading(1, 1), 1, 4)['holds']
        assert oracle.exp_source_identity(Grading(2, 0), "1/2", 4)['holds']

    def test_exp_source_identity_mixed_order_six(self, oracle):
        """Test the exp-source identity through order six on (2|1)"""
        report = oracle.exp_source_identity(Grading(2, 1), "2/3", 6)
        assert report['holds']
        assert report['residual_terms'] == 0
        assert report['order'] == 6

    def test_times_to_sources(self, oracle):
        """Test the trade of times for sources on (1|0)"""
        report = oracle.times_to_sources([2], Grading(1, 0), 1, Grading(1, 0), hbar=1, order=3)
        assert report['series_agree']
        assert report['times'][0] == QQ_I(QQ(1, 2), 0)


class TestDuality:
    def test_reflected_duality(self, oracle):
        """Test Z(X,Y;ħ) = -Z'(Y,X;-ħ) for one source and a 1x1 matrix"""
        report = oracle.oracle_duality(1, 0, 1, 0, seed=2)
        assert report['closed']
        assert report['expected_reflected_ratio'] == QQ_I(-1, 0)
        assert report['reflected_matches']

    def test_open_case_is_skipped(self, oracle):
        report = oracle.oracle_duality(1, 0, 0, 1)
        assert not report['closed']
        assert 'points' not in report


if __name__ == "__main__":
    pytest.main([__file__])
