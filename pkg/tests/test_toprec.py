# tests/test_toprec.py
import pytest
import os

import sys
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import numpy as np

from core.curve import CurveSolver, CurveSpec
from core.errors import CapExceededError, VerificationError
from core.toprec import (BranchPoint, DualityChecker, FreeEnergyTable, LocalSeries, TopologicalRecursion,
                         compose, gaussian_field_volume, gaussian_volume_coefficient, swap_xy)


@pytest.fixture(scope="module")
def solver():
    return CurveSolver()


@pytest.fixture(scope="module")
def gaussian(solver):
    """x = z + 1/z, y = z"""
    curve = solver.solve_rational_curve(CurveSpec(1.0, fields=[(0.0, 1)]))
    return TopologicalRecursion(curve, {'g_max': 3, 'n_max': 3})


class TestLocalSeries:
    def test_inverse(self):
        """Test (1 + 2ζ)^{-1}"""
        inverse = LocalSeries.taylor([1, 2, 0, 0]).inverse()
        np.testing.assert_allclose(np.asarray(inverse.coeffs, dtype=complex), [1, -2, 4, -8])
        assert inverse.precision == 4

    def test_precision_of_products(self):
        """Test that a pole lowers the known precision"""
        product = LocalSeries.monomial(-1, 3) * LocalSeries.taylor([1, 1, 1, 1])
        assert product.valuation == -1
        assert product.precision == 3
        assert product.residue() == 1
        np.testing.assert_allclose(np.asarray(product.polar_part(), dtype=complex), [1])
        with pytest.raises(ArithmeticError):
            product.coefficient(3)

    def test_compose(self):
        """Test t(ζ) = ζ + ζ² composed with ζ"""
        inner = LocalSeries(1, [1], 5)
        result = compose([0, 1, 1], inner)
        assert result.coefficient(1) == 1
        assert result.coefficient(2) == 1
        assert result.coefficient(3) == 0
        with pytest.raises(ValueError):
            compose([0, 1], LocalSeries.taylor([1, 1]))

    def test_integral_of_pole(self):
        with pytest.raises(ValueError):
            LocalSeries.monomial(-2, 3).integral()

    def test_derivative_of_taylor_series(self):
        """Test that d/dζ of a Taylor series stays a Taylor series"""
        derivative = LocalSeries.taylor([5, 1, 2, 3]).derivative()
        assert derivative.valuation == 0
        assert derivative.precision == 3
        np.testing.assert_allclose(np.asarray(derivative.coeffs, dtype=complex), [1, 4, 9])
        primitive = (derivative * LocalSeries.taylor([1, 0, 0])).integral()
        assert primitive.coefficient(1) == 1
        assert primitive.coefficient(3) == 3

    def test_integral_skips_vanishing_polar_terms(self):
        series = LocalSeries(-1, [0, 2], 3)
        assert series.integral().coefficient(1) == 2


class TestBranchPoint:
    def test_gaussian_involution(self, gaussian):
        """Test σ(1 + ζ) = 1/(1 + ζ) near a = 1"""
        bp = BranchPoint(gaussian.curve, 1.0, 8)
        np.testing.assert_allclose(np.asarray(bp.s.coeffs[:4], dtype=complex), [-1, 1, -1, 1], atol=1e-12)
        assert bp.x_second == pytest.approx(2.0)
        assert bp.y_prime == pytest.approx(1.0)

    def test_rescaled_coordinate(self, gaussian):
        """Test s(u) = 2/(2 + u) - 1 for z = 1 + u/2"""
        bp = BranchPoint(gaussian.curve, 1.0, 8, scale=0.5)
        np.testing.assert_allclose(np.asarray(bp.s.coeffs[:4], dtype=complex), [-1, 0.5, -0.25, 0.125], atol=1e-12)
        assert bp.x_second == pytest.approx(2.0)
        assert bp.y_prime == pytest.approx(1.0)

    def test_sheet_involution(self, gaussian):
        assert gaussian.sheet_involution(2.0) == pytest.approx(0.5)
        assert gaussian.sheet_involution(-1.25) == pytest.approx(-0.8)


class TestCorrelators:
    def test_omega_11(self, gaussian):
        """Test ω_{1,1}(z) = z³/(z² - 1)⁴ at z = 2"""
        assert gaussian.omega_gn(1, 1).evaluate([2.0]) == pytest.approx(8 / 81, rel=1e-10)

    def test_bergman_kernel(self, gaussian):
        assert gaussian.omega_gn(0, 2).evaluate([1.0, 3.0]) == pytest.approx(0.25)

    @pytest.mark.parametrize("g,n", [(0, 3), (1, 2), (1, 3)])
    def test_symmetry(self, gaussian, g, n):
        assert gaussian.symmetry_check(g, n, samples=5)['holds']

    @pytest.mark.parametrize("g", [1, 2])
    def test_residues(self, gaussian, g):
        report = gaussian.residue_check(g)
        assert report['holds']
        assert len(report['rows']) == 2

    def test_invalid_and_capped(self, gaussian):
        with pytest.raises(CapExceededError):
            gaussian.omega_gn(4, 1)
        with pytest.raises(ValueError):
            gaussian.omega_gn(0, 1)
        with pytest.raises(ValueError):
            gaussian.omega_gn(1, 2).evaluate([1.0])

    def test_mixed_curve_symmetry(self, solver):
        curve = solver.solve_rational_curve(CurveSpec(0.1, sources=[(2.0, 1)], fields=[(0.0, 1)]))
        recursion = TopologicalRecursion(curve, {'g_max': 1, 'n_max': 3})
        assert recursion.symmetry_check(0, 3, samples=4)['holds']
        assert recursion.residue_check(1)['holds']

    def test_no_branch_points(self, solver):
        curve = solver.solve_rational_curve(CurveSpec(1.0, sources=[(0.0, 1)]))
        recursion = TopologicalRecursion(curve)
        with pytest.raises(VerificationError):
            recursion.sheet_involution(1.0)
        assert recursion.free_energy(2) == 0


class TestFreeEnergies:
    def test_gaussian_f2(self, gaussian):
        """Test F_2 = B_4/(4·2) = -1/240"""
        assert gaussian.free_energy(2) == pytest.approx(-1 / 240, abs=1e-10)

    def test_gaussian_f3(self, gaussian):
        assert gaussian.free_energy(3) == pytest.approx(1 / 1008, abs=1e-10)

    def test_scaling(self, solver):
        """Test F_g(t) = t^{2-2g} F_g(1)"""
        curve = solver.solve_rational_curve(CurveSpec(2.0, fields=[(0.0, 1)]))
        recursion = TopologicalRecursion(curve, {'g_max': 2})
        assert recursion.free_energy(2) == pytest.approx(-1 / 960, abs=1e-10)

    def test_small_charge(self, solver):
        """Test F_2 and F_3 at t = 0.1, where branch points sit close to the pole"""
        curve = solver.solve_rational_curve(CurveSpec(0.1, fields=[(0.0, 1)]))
        recursion = TopologicalRecursion(curve, {'g_max': 3})
        assert recursion.free_energy(2) == pytest.approx(-100 / 240, rel=1e-10)
        assert recursion.free_energy(3) == pytest.approx(1e4 / 1008, rel=1e-10)
        assert abs(recursion.free_energy(3).imag) < 1e-10

    def test_f1_real_part(self, gaussian):
        """Test Re F_1 = -(1/24) ln 4"""
        assert gaussian.free_energy(1).real == pytest.approx(-np.log(4) / 24)

    @pytest.mark.parametrize("spec,expected", [
        (CurveSpec(2.0, fields=[(0.0, 1)]), -np.log(2) / 6),
        (CurveSpec(1.0, fields=[(0.5, 1)]), -np.log(4) / 24),
    ])
    def test_f1_charge_dependence(self, solver, spec, expected):
        """Test F_1(t) - F_1(1) = -(1/12) ln t, independent of the field position"""
        recursion = TopologicalRecursion(solver.solve_rational_curve(spec), {'g_max': 1})
        assert recursion.free_energy(1).real == pytest.approx(expected)

    def test_f0_gaussian(self, gaussian):
        """Test F_0 = (t²/2) ln t - 3t²/4 at t = 1"""
        assert gaussian.free_energy(0) == pytest.approx(-0.75, abs=1e-12)

    @pytest.mark.parametrize("spec,expected", [
        (CurveSpec(2.0, fields=[(0.0, 1)]), 2 * np.log(2) - 3),
        (CurveSpec(1.0, fields=[(0.5, 1)]), -0.625),
        (CurveSpec(-1.0, sources=[(0.0, 1)]), 0.0),
        (CurveSpec(-1.0, sources=[(0.5, 1)]), 0.125),
    ])
    def test_f0_closed_forms(self, solver, spec, expected):
        """Test F_0 for a rescaled, a shifted and a swapped Gaussian"""
        recursion = TopologicalRecursion(solver.solve_rational_curve(spec), {'g_max': 0})
        assert recursion.free_energy(0) == pytest.approx(expected, abs=1e-12)

    def test_negative_genus(self, gaussian):
        with pytest.raises(ValueError):
            gaussian.free_energy(-1)

    def test_volume_coefficient(self):
        assert gaussian_volume_coefficient(2) == pytest.approx(-1 / 240)
        with pytest.raises(ValueError):
            gaussian_volume_coefficient(1)

    def test_field_volume(self):
        spec = CurveSpec(2.0, fields=[(0.0, 1), (1.0, 1)])
        assert gaussian_field_volume(spec, 0) == pytest.approx(2 * (2 * np.log(2) - 3))
        assert gaussian_field_volume(spec, 2) == pytest.approx(-2 / 960)

    def test_normalized_table(self, gaussian):
        table = gaussian.free_energies(3)
        assert abs(table.normalized[0]) < 1e-12
        assert abs(table.normalized[2]) < 1e-10
        assert abs(table.normalized[3]) < 1e-10
        again = FreeEnergyTable.from_dict(table.to_dict())
        assert again[2] == pytest.approx(table[2])
        assert set(again.normalized) == {0, 2, 3}

    def test_genus_one_resolvent(self, gaussian):
        """Test the torus counts 1 and 10 for str M⁴ and str M⁶"""
        coeffs = gaussian.resolvent_expansion(1, 6)
        np.testing.assert_allclose(coeffs, [0, 0, 0, 0, 1, 0, 10], atol=1e-9)

    def test_planar_resolvent(self, gaussian):
        np.testing.assert_allclose(gaussian.resolvent_expansion(0, 4), [1, 0, 1, 0, 2], atol=1e-12)


class TestDuality:
    def test_swap_helper(self, gaussian):
        swapped = swap_xy(gaussian.curve)
        assert swapped.spec.hbar == -1.0
        assert swapped.branch_points is None

    def test_gaussian_duality(self):
        """Test normalized free energies of the Gaussian and its swap"""
        checker = DualityChecker({'g_max': 3})
        report = checker.duality_report(CurveSpec(1.0, fields=[(0.5, 1)]), g_max=3)
        assert report['holds']
        assert report['swap_consistency'] < 1e-12
        assert [row['g'] for row in report['rows']] == [2, 3]
        assert report['rows'][0]['delta_raw'] == pytest.approx(1 / 240, abs=1e-10)
        assert report['oracle']['computed']
        assert report['oracle']['matches']
        assert report['F0']['normalized_difference'] == pytest.approx([0.0, 0.0], abs=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_two_by_two(self, seed):
        """Test two sources and two fields at ħ = 0.1 through genus 3"""
        rng = np.random.default_rng(seed)
        points = []
        while len(points) < 4:
            z = complex(rng.uniform(-2, 2), rng.uniform(-1, 1))
            if all(abs(z - w) > 0.8 for w in points):
                points.append(z)
        signs = [int(v) for v in rng.choice([-1, 1], size=4)]
        spec = CurveSpec(0.1, sources=list(zip(points[:2], signs[:2])), fields=list(zip(points[2:], signs[2:])))
        report = DualityChecker({'g_max': 3}).duality_report(spec, g_max=3, tol=1e-8, with_oracle=False)
        assert report['swap_consistency'] < 1e-10
        assert [row['g'] for row in report['rows']] == [2, 3]
        assert report['holds'], [row['delta'] for row in report['rows']]

    def test_oracle_can_be_skipped(self):
        checker = DualityChecker()
        report = checker.duality_report(CurveSpec(1.0, fields=[(0.0, 1)]), g_max=2, with_oracle=False)
        assert 'oracle' not in report
        assert report['holds']


if __name__ == "__main__":
    pytest.main([__file__])
