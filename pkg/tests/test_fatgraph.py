# tests/test_fatgraph.py
import pytest
import os

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from sympy.polys.domains import QQ, QQ_I

from core.errors import CapExceededError
from core.fatgraph import FatgraphEngine, FatgraphStar, MomentPolynomial, koszul_sign
from core.supermatrix import Grading


@pytest.fixture
def engine():
    return FatgraphEngine({'enumeration_cap': 10, 'indexsum_cap': 6})


class TestFatgraphStar:
    def test_planar_and_torus_pairings(self):
        """Test faces and genus of the two kinds of pairing on a 4-valent vertex"""
        planar = FatgraphStar([4], [(0, 1), (2, 3)])
        torus = FatgraphStar([4], [(0, 2), (1, 3)])
        assert (planar.V, planar.E, planar.F, planar.genus) == (1, 2, 3, 0)
        assert (torus.V, torus.E, torus.F, torus.genus) == (1, 2, 1, 1)

    def test_unpaired_slots_are_univalent_vertices(self):
        """Test that an unpaired slot adds a vertex, an edge and a marked face entry"""
        star = FatgraphStar([2], [])
        assert star.unpaired == [0, 1]
        assert (star.V, star.E, star.F) == (3, 2, 1)
        assert star.faces == [2]
        assert star.hbar_exponent == -2

    def test_invalid_pairing(self):
        """Test that overlapping pairs are rejected"""
        with pytest.raises(ValueError):
            FatgraphStar([4], [(0, 1), (1, 2)])
        with pytest.raises(ValueError):
            FatgraphStar([2], [(0, 0)])

    def test_round_trip(self):
        """Test to_dict/from_dict"""
        star = FatgraphStar([3, 3], [(0, 4), (1, 3)])
        copy = FatgraphStar.from_dict(star.to_dict())
        assert copy.to_dict() == star.to_dict()


class TestEnumeration:
    def test_counts(self, engine):
        """Test the number of perfect and partial pairings"""
        assert len(list(engine.enumerate_stars([4], allow_unpaired=False))) == 3
        assert len(list(engine.enumerate_stars([6], allow_unpaired=False))) == 15
        # involutions on 4 points
        assert len(list(engine.enumerate_stars([2, 2]))) == 10
        assert list(engine.enumerate_stars([3], allow_unpaired=False)) == []

    def test_each_pairing_once(self, engine):
        """Test that no pairing is produced twice"""
        seen = [tuple(s.pairs) for s in engine.enumerate_stars([3, 2])]
        assert len(seen) == len(set(seen))

    def test_cap(self, engine):
        """Test the enumeration cap"""
        with pytest.raises(CapExceededError):
            list(engine.enumerate_stars([6, 6]))

    def test_invalid_valency(self, engine):
        with pytest.raises(ValueError):
            list(engine.enumerate_stars([0, 2]))

    def test_single_trace_exponent_is_euler_characteristic(self, engine):
        """Test ħ^{E-V-F} = ħ^{2g-2} for single traces"""
        for star in engine.enumerate_stars([5]):
            assert star.hbar_exponent == 2 * star.genus - 2
        assert all(e % 2 == 0 for e in engine.moment_polynomial([6]).hbar_exponents())


class TestMomentPolynomial:
    def test_quadratic_trace(self, engine):
        """Test ⟨str N²⟩ = ħ^{-2}(p_0² + p_2)"""
        poly = engine.moment_polynomial([2])
        assert poly.terms == {(-2, (2,)): 1, (-2, (0, 0)): 1}

    def test_quartic_perfect(self, engine):
        """Test the genus expansion of str N⁴ at Y = 0"""
        poly = engine.moment_polynomial([4], perfect_only=True)
        assert poly.coefficient(-2, [0, 0, 0]) == 2
        assert poly.coefficient(0, [0]) == 1

    def test_round_trip(self, engine):
        poly = engine.moment_polynomial([3, 1])
        assert MomentPolynomial.from_dict(poly.to_dict()) == poly

    def test_genus_series(self, engine):
        """Test the (3|1) quartic count at ħ = 1/(p-q)"""
        result = engine.genus_series([4], Grading(3, 1))
        assert result['by_genus'] == {0: 2, 1: 1}
        assert result['by_hbar_power'] == {-2: 2, 0: 1}
        assert result['value'] == QQ_I(9, 0)

    def test_genus_series_needs_unequal_blocks(self, engine):
        with pytest.raises(ValueError):
            engine.genus_series([4], Grading(1, 1))


class TestSpecialization:
    @pytest.mark.parametrize("valencies", [[1], [2], [3], [1, 1], [2, 1], [4]])
    @pytest.mark.parametrize("grading,y_values", [
        (Grading(1, 1), [2, "1/3"]),
        (Grading(2, 1), [1, -1, 3]),
    ])
    def test_topological_matches_index_sum(self, engine, valencies, grading, y_values):
        """Test the specialized polynomial against the explicit sum over indices"""
        hbar = QQ_I(QQ(1, 2), 0)
        poly = engine.moment_polynomial(valencies)
        assert engine.specialize(poly, grading, y_values, hbar) == \
            engine.moment_indexsum(valencies, grading, y_values, hbar)

    def test_gaussian_quadratic(self, engine):
        """Test ⟨(1/ħ) str N²⟩ on (1|0) with Y = y"""
        poly = engine.moment_polynomial([2])
        assert engine.specialize(poly, Grading(1, 0), [0], 1) == QQ_I.one
        assert engine.specialize(poly, Grading(1, 0), [2], 1) == QQ_I(5, 0)

    def test_super_quartic(self, engine):
        """Test ⟨(1/ħ) str M⁴⟩ = (p-q)(2(p-q)² + 1) at ħ = 1"""
        poly = engine.moment_polynomial([4], perfect_only=True)
        assert engine.specialize(poly, Grading(2, 1), None, 1) == QQ_I(3, 0)
        assert engine.specialize(poly, Grading(1, 1), None, 1) == QQ_I.zero


class TestSignsAndWeights:
    def test_koszul_sign(self):
        """Test swapping two odd factors"""
        assert koszul_sign([1, 1], [1, 0]) == -1
        assert koszul_sign([1, 0], [1, 0]) == 1

    def test_entry_weight(self, engine):
        """Test the structured weight of N_01 N_10 on (1|1)"""
        weight = engine.entry_weight([(0, 1), (1, 0)], Grading(1, 1), [(0, 1)])
        assert weight['sign'] == -1
        assert weight['hbar_power'] == 1
        assert weight['deltas'] == []
        assert weight['y_factors'] == []

    def test_six_entry_labeling(self, engine):
        """Test the labeling (1,3,2,4,3,1,4,4,1,3,2,3) on (2|2): weight -ħ⁴ Y_44 Y_23"""
        entries = [(0, 2), (1, 3), (2, 0), (3, 3), (0, 2), (1, 2)]
        weight = engine.entry_weight(entries, Grading(2, 2), [(0, 2), (1, 4)])
        assert weight['sign'] == -1
        assert weight['hbar_power'] == 4
        assert weight['y_factors'] == [[3, 3], [1, 2]]

    @pytest.mark.parametrize("grading,y_values,hbar,expected", [
        (Grading(1, 2), [5, 1, 2], 3, -4860),
        (Grading(2, 1), [1, 2, 3], 3, -972),
        (Grading(1, 1), [4, 7], 2, 0),
    ])
    def test_two_unpaired_octic_star(self, engine, grading, y_values, hbar, expected):
        """Test str N⁸ with edges (1,5), (2,7), (3,6): ħ³ (p-q) str(ħY)²"""
        star = FatgraphStar([8], [(0, 4), (1, 6), (2, 5)])
        assert sorted(star.faces) == [0, 2]
        means = [hbar * y for y in y_values]
        value = engine.star_indexsum(star, grading, means, hbar)
        assert value == QQ_I(expected, 0)

        str_square = sum(m * m * grading.sigma(i) for i, m in enumerate(means))
        assert value == QQ_I(hbar ** 3 * (grading.p - grading.q) * str_square, 0)

    def test_one_edge_trace_weight(self, engine):
        """Test ħ str(ħY)^{n+k-l-1} str(ħY)^{l-k-1}"""
        assert engine.one_edge_trace_weight(2, 0, 1, Grading(1, 0), [5], 1) == QQ_I.one
        assert engine.one_edge_trace_weight(4, 0, 2, Grading(1, 0), [2], 3) == QQ_I(12, 0)
        with pytest.raises(ValueError):
            engine.one_edge_trace_weight(3, 2, 1, Grading(1, 0), [1], 1)

    def test_phi_map_invariance(self, engine):
        """Test that a matched boson/fermion pair leaves moments unchanged"""
        result = engine.phi_map_invariance([3], Grading(1, 0), [2], 1, extra_value=5)
        assert result['holds']
        result = engine.phi_map_invariance([2, 1], Grading(1, 1), [1, 3], "1/2")
        assert result['holds']

    def test_index_sum_size_cap(self, engine):
        with pytest.raises(CapExceededError):
            engine.moment_indexsum([2], Grading(3, 2), [0] * 5, 1)


if __name__ == "__main__":
    pytest.main([__file__])
