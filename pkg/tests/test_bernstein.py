"""
Tests for Bernstein approximants and their shape preservation.
"""

import numpy as np
import pytest

from bernstein import BernsteinApproximant, bernstein_approximant, bernstein_eval, shape_preservation_report
from errors import DomainError, ParameterError
from function_models import CATALOG, THREE_CONVEX, catalog, declared_flags

# Test constants
TOL_EXACT = 1e-12
DEGREES = [8, 16, 32]

THREE_CONVEX_ENTRIES = [name for name in CATALOG if THREE_CONVEX in declared_flags(catalog(name))]

# =============================================================================
# EVALUATION
# =============================================================================

class TestBernsteinEval:
    def test_reproduces_linear_functions(self):
        f = catalog("poly", coeffs=[2.0, -3.0])
        approx = bernstein_approximant(f, 7, (-1.0, 2.0))
        xs = np.linspace(-1.0, 2.0, 11)
        assert np.allclose(bernstein_eval(approx, xs), 2.0 - 3.0 * xs, atol=TOL_EXACT)

    def test_square_by_hand(self):
        # B_4(x^2)(x) = x^2 + x(1 - x)/4
        approx = bernstein_approximant(catalog("x2"), 4, (0.0, 1.0))
        assert bernstein_eval(approx, 0.3) == pytest.approx(0.1425, abs=TOL_EXACT)

    def test_interpolates_endpoints(self):
        f = catalog("exp")
        approx = bernstein_approximant(f, 5, (0.0, 2.0))
        assert bernstein_eval(approx, 0.0) == pytest.approx(1.0, abs=TOL_EXACT)
        assert bernstein_eval(approx, 2.0) == pytest.approx(np.exp(2.0), abs=1e-9)

    def test_degree_zero_is_constant(self):
        approx = bernstein_approximant(catalog("x3"), 0, (1.0, 2.0))
        assert bernstein_eval(approx, 1.7) == 1.0

    def test_outside_interval(self):
        approx = bernstein_approximant(catalog("x3"), 3, (0.0, 1.0))
        with pytest.raises(DomainError):
            bernstein_eval(approx, 1.5)

    def test_node_count_validated(self):
        with pytest.raises(ParameterError):
            BernsteinApproximant(degree=3, node_values=[0.0, 1.0], interval=(0.0, 1.0))

    def test_interval_must_lie_in_domain(self):
        with pytest.raises(DomainError):
            bernstein_approximant(catalog("sqrt"), 4, (-1.0, 1.0))


# =============================================================================
# SHAPE PRESERVATION
# =============================================================================

class TestShapePreservation:
    def test_order_above_degree_rejected(self, x3):
        with pytest.raises(ParameterError):
            shape_preservation_report(x3, 2, 3)

    def test_report_details(self, x3):
        report = shape_preservation_report(x3, 16, 3, (0.0, 2.0))
        assert report.verdict
        assert report.cases == ["bernstein_order_3"]
        assert report.details["degree"] == 16
        assert report.details["interval"] == [0.0, 2.0]
        assert report.details["sup_distance"] > 0

    @pytest.mark.parametrize("n", DEGREES)
    @pytest.mark.parametrize("name", THREE_CONVEX_ENTRIES)
    def test_catalog_entries_stay_three_convex(self, name, n):
        report = shape_preservation_report(catalog(name), n, 3)
        assert report.verdict, f"B_{n}({name}): margin {report.margin} with tol {report.tol}"

    @pytest.mark.slow
    @pytest.mark.parametrize("n", DEGREES)
    def test_random_block_models(self, n, random_models):
        for i, model in enumerate(random_models(100)):
            report = shape_preservation_report(model, n, 3)
            assert report.verdict, f"B_{n} of model {i}: margin {report.margin}"

    def test_lower_orders_preserved(self):
        f = catalog("x_over_1px")
        assert shape_preservation_report(f, 12, 1).verdict
        assert shape_preservation_report(f.model_copy(update={"scale": -1.0}), 12, 2).verdict

    @pytest.mark.parametrize("name", list(CATALOG))
    def test_distance_shrinks_with_degree(self, name):
        f = catalog(name)
        coarse = shape_preservation_report(f, 8, 0).details["sup_distance"]
        fine = shape_preservation_report(f, 64, 0).details["sup_distance"]
        assert fine < coarse, f"{name}: sup distance {fine} at n=64 vs {coarse} at n=8"

    @pytest.mark.parametrize("name", list(CATALOG))
    def test_derivative_distance_shrinks_with_degree(self, name):
        f = catalog(name)
        coarse = shape_preservation_report(f, 8, 0).details["derivative_sup_distance"]
        fine = shape_preservation_report(f, 64, 0).details["derivative_sup_distance"]
        assert fine < coarse, f"{name}: derivative distance {fine} at n=64 vs {coarse} at n=8"
