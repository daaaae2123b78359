"""
Tests for Hermite-Hadamard type bounds.
"""

import math

import numpy as np
import pytest

from errors import MeasureError, ParameterError, WeightSpecError
from function_models import CATALOG, blocks, catalog, evaluate
from hh_bounds import (
    WeightSpec,
    barycenter,
    bp_bounds_check,
    chain_check,
    fejer_check,
    hh_classical_check,
    integral_mean,
    nested_mean_checks,
    rigidity_check,
    slope_bounds_check,
    validate_weight,
    weighted_3convex_check,
)
from ordering import DiscreteMeasure

# Test constants
TOL_VALUE = 1e-9
TOL_SLOPE = 1e-12

# =============================================================================
# INTEGRAL MEANS AND CLASSICAL BOUNDS
# =============================================================================

class TestMeans:
    def test_integral_mean_of_square(self):
        assert integral_mean(catalog("x2"), 0.0, 3.0) == pytest.approx(3.0, abs=TOL_VALUE)

    def test_integral_mean_of_kinked_model(self):
        f = blocks([0.0, 0.0, 0.0], [(0.5, 3.0)], (0.0, 1.0))
        assert integral_mean(f, 0.0, 1.0) == pytest.approx(0.125, abs=TOL_VALUE)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", list(CATALOG))
    def test_integral_mean_matches_midpoint_sum(self, name):
        f = catalog(name)
        a = f.lo + (f.hi - f.lo) / 16
        b = f.hi
        count = 2 ** 16
        midpoints = a + (np.arange(count) + 0.5) * (b - a) / count
        riemann = float(np.mean(evaluate(f, midpoints)))
        assert integral_mean(f, a, b) == pytest.approx(riemann, rel=1e-6, abs=1e-6)

    def test_interval_order(self, x3):
        with pytest.raises(ParameterError):
            integral_mean(x3, 1.0, 0.0)

    def test_barycenter(self):
        mu = DiscreteMeasure.from_pairs([(0.0, 0.25), (2.0, 0.75)])
        assert barycenter(mu) == 1.5


class TestClassical:
    def test_convex_function_holds(self):
        mu = DiscreteMeasure.from_pairs([(0.2, 0.5), (0.9, 0.5)])
        report = hh_classical_check(catalog("x2"), mu, 0.0, 1.0)
        assert report.verdict
        assert report.witness["barycenter"] == pytest.approx(0.55)
        assert report.warnings == []

    def test_support_outside_interval(self):
        with pytest.raises(MeasureError):
            hh_classical_check(catalog("x2"), DiscreteMeasure.dirac(2.0), 0.0, 1.0)

    @pytest.mark.parametrize("density", ["uniform", "triangular", "parabolic"])
    def test_fejer_convex(self, density):
        report = fejer_check(catalog("cosh"), 0.0, 2.0, density)
        assert report.verdict
        assert report.cases == ["fejer", density]

    def test_fejer_concave_fails_with_warning(self):
        report = fejer_check(catalog("sin"), 0.0, math.pi)
        assert not report.verdict
        assert any("not convex" in w for w in report.warnings)


# =============================================================================
# TWO-POINT BOUNDS FOR 3-CONVEX FUNCTIONS
# =============================================================================

class TestTwoPointBounds:
    def test_quartic_constants(self):
        report = bp_bounds_check(catalog("x4"), 0.0, 1.0)
        assert report.verdict
        assert report.lhs == pytest.approx(4.0 / 27.0, abs=TOL_VALUE)
        assert report.details["middle"] == pytest.approx(0.2, abs=TOL_VALUE)
        assert report.rhs == pytest.approx(7.0 / 27.0, abs=TOL_VALUE)
        assert report.details["condensation_node"] == pytest.approx(2.0 / 3.0)

    @pytest.mark.parametrize("coeffs", [[0.0, 0.0, 1.0], [1.0, -2.0, 3.0], [-0.5, 0.25, -4.0]])
    def test_quadratics_are_equality_cases(self, coeffs):
        report = bp_bounds_check(catalog("poly", coeffs=coeffs), -1.0, 2.0)
        assert abs(report.details["lower_margin"]) < TOL_VALUE
        assert abs(report.details["upper_margin"]) < TOL_VALUE

    def test_negated_cube_fails(self):
        report = bp_bounds_check(catalog("x3", scale=-1.0), 0.0, 1.0)
        assert not report.verdict
        assert report.warnings

    @pytest.mark.slow
    def test_random_block_models(self, random_models):
        for i, model in enumerate(random_models(500)):
            assert bp_bounds_check(model, 0.0, 1.0).verdict, f"model {i}"

    def test_chain_for_convex_three_convex(self):
        report = chain_check(catalog("cosh"), 0.0, 2.0)
        assert report.verdict
        assert len(report.details["terms"]) == 5
        assert report.cases[0] == "midpoint<=condensation"

    def test_rigidity_premise_holds(self, x3):
        report = rigidity_check(x3, 0.0, 1.0)
        assert report.verdict
        assert report.cases == ["rigidity", "premise_holds"]
        assert report.margin == pytest.approx(0.25, abs=TOL_VALUE)

    def test_rigidity_premise_fails(self):
        report = rigidity_check(catalog("sinh"), -1.0, 1.0)
        assert report.verdict
        assert report.cases[1] == "premise_fails"


# =============================================================================
# WEIGHTED BOUNDS
# =============================================================================

class TestWeighted:
    def test_linear_weight_on_cube(self, x3):
        report = weighted_3convex_check(x3, WeightSpec(name="linear"), 0.0, 1.0)
        assert report.verdict
        assert report.lhs == pytest.approx(-0.25, abs=TOL_VALUE)
        assert report.details["middle"] == pytest.approx(-0.15, abs=TOL_VALUE)
        assert report.rhs == pytest.approx(-0.125, abs=TOL_VALUE)

    def test_odd_power_weight(self):
        report = weighted_3convex_check(catalog("sinh"), WeightSpec(name="odd_power", exponent=1), -1.0, 1.0)
        assert report.verdict
        expected_middle = -2.0 * (3.0 * math.sinh(1.0) - 2.0 * math.cosh(1.0))
        assert report.details["middle"] == pytest.approx(expected_middle, abs=TOL_VALUE)

    def test_cosine_weight(self):
        report = weighted_3convex_check(catalog("exp"), WeightSpec(name="cos"), 0.0, math.pi)
        assert report.verdict
        assert report.details["W_integral"] == pytest.approx(2.0, abs=TOL_VALUE)

    def test_asymmetric_primitive_rejected(self):
        with pytest.raises(WeightSpecError):
            validate_weight(WeightSpec(name="cos"), 0.0, 2.0)

    def test_negative_primitive_rejected(self):
        with pytest.raises(WeightSpecError):
            validate_weight(WeightSpec(name="cos"), math.pi, 3.0 * math.pi)


# =============================================================================
# NESTED MEANS AND SLOPES
# =============================================================================

class TestNestedAndSlopes:
    def test_nested_means_convex(self):
        report = nested_mean_checks(catalog("x2"), 0.0, 2.0)
        assert report.verdict
        assert "combined upper" in report.details["margins"]
        assert len(report.cases) == 8

    def test_nested_single_eps(self):
        report = nested_mean_checks(catalog("exp"), -1.0, 1.0, eps=0.3)
        assert report.verdict
        assert report.witness["epsilons"] == [0.3]

    def test_nested_eps_range(self):
        with pytest.raises(ParameterError):
            nested_mean_checks(catalog("x2"), 0.0, 2.0, eps=1.0)

    def test_nested_concave_fails(self):
        assert not nested_mean_checks(catalog("sin"), 0.0, math.pi).verdict

    def test_slope_chain_for_log1p(self):
        report = slope_bounds_check(catalog("log1p"), 0.0, 1.0)
        assert report.verdict
        assert report.lhs == pytest.approx(2.0 / 3.0, abs=TOL_SLOPE)
        assert report.details["middle"] == pytest.approx(math.log(2.0), abs=TOL_SLOPE)
        assert report.rhs == pytest.approx(17.0 / 24.0, abs=TOL_SLOPE)

    def test_slope_chain_for_log_mean(self):
        report = slope_bounds_check(catalog("log_mean"), 1.0, 3.0)
        assert report.verdict, f"margin {report.margin}"
        assert report.lhs > 0.0

    @pytest.mark.slow
    def test_slopes_of_random_models(self, random_models, rng):
        for i, model in enumerate(random_models(500)):
            a, b = np.sort(rng.uniform(0.0, 1.0, 2))
            if b - a > 1e-3:
                assert slope_bounds_check(model, a, b).verdict, f"model {i} on [{a}, {b}]"
