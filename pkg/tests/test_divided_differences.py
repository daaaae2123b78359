"""
Tests for divided differences, difference operators and the n-convexity verdicts.
"""

import itertools

import numpy as np
import pytest

from divided_differences import (
    SampleGrid,
    SamplingPolicy,
    bennett_identity_residual,
    build_table,
    default_tol,
    divided_difference,
    divided_difference_nodes,
    equidistant_third_difference,
    iterated_difference,
    n_convexity_verdict,
    positive_differences3_check,
    product_form_difference,
    sample_grid,
    shape_warnings,
)
from errors import (
    CoincidentNodesError,
    DomainError,
    InsufficientNodesError,
    OrderTooLargeError,
    ParameterError,
    UnsortedDataError,
)
from function_models import CONCAVE, THREE_CONVEX, blocks, catalog, evaluate

# Test constants
TOL_EXACT = 1e-12
TOL_BENNETT = 1e-7

# Smooth entries with analytic derivatives and no endpoint singularity
BENNETT_ENTRIES = [
    "x_over_1px", "one_minus_exp", "log1p", "sinh", "cosh", "exp", "exp_neg",
    "inv_1px", "sin", "cube_sixth_minus_sin", "shifted_cubic", "x2", "x3", "x4",
]

# =============================================================================
# SAMPLE GRID VALIDATION
# =============================================================================

class TestSampleGrid:
    def test_coincident_nodes_rejected(self):
        with pytest.raises(CoincidentNodesError):
            SampleGrid(xs=[0.0, 1.0, 1.0, 2.0], ys=[0.0, 1.0, 1.0, 4.0])

    def test_nodes_below_gap_min_rejected(self):
        with pytest.raises(CoincidentNodesError):
            SampleGrid(xs=[0.0, 1e-6, 1.0], ys=[0.0, 0.0, 1.0], gap_min=1e-3)

    def test_unsorted_nodes_rejected(self):
        with pytest.raises(UnsortedDataError):
            SampleGrid(xs=[0.0, 2.0, 1.0], ys=[0.0, 4.0, 1.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            SampleGrid(xs=[0.0, 1.0], ys=[0.0])

    def test_empty_grid_rejected(self):
        with pytest.raises(InsufficientNodesError):
            SampleGrid(xs=[], ys=[])

    def test_sample_grid_evaluates_model(self, x3):
        grid = sample_grid(x3, [0.0, 1.0, 2.0])
        assert grid.ys == [0.0, 1.0, 8.0]
        assert len(grid) == 3


# =============================================================================
# DIVIDED DIFFERENCES
# =============================================================================

class TestDividedDifference:
    def test_square_second_difference_is_one(self):
        grid = sample_grid(catalog("x2"), [-1.0, 0.5, 3.0])
        assert abs(divided_difference(grid) - 1.0) < TOL_EXACT

    def test_polynomial_leading_coefficient(self):
        f = catalog("poly", coeffs=[0.5, -1.0, 2.0, 0.25])
        xs = np.array([-2.5, -0.7, 0.9, 2.8])
        value = divided_difference_nodes(xs, evaluate(f, xs))
        assert abs(value - 0.25) < 1e-9, f"third divided difference of a cubic: {value}"

    def test_order_beyond_degree_vanishes(self):
        xs = [0.0, 0.5, 1.5, 2.0, 3.5]
        value = divided_difference(sample_grid(catalog("x3"), xs))
        assert abs(value) < 1e-10

    def test_permutation_invariance(self):
        f = catalog("exp")
        xs = np.array([0.1, -1.8, 1.9, -0.9, 1.0])
        ys = evaluate(f, xs)
        reference = divided_difference_nodes(xs, ys)
        for perm in itertools.permutations(range(5)):
            perm = list(perm)
            value = divided_difference_nodes(xs[perm], ys[perm])
            assert abs(value - reference) <= 1e-9 * (1.0 + abs(reference)), f"permutation {perm}"

    def test_product_form_agrees(self):
        xs = np.array([0.2, 1.1, 2.3, 3.7])
        ys = evaluate(catalog("log1p"), xs)
        assert abs(divided_difference_nodes(xs, ys) - product_form_difference(xs, ys)) < 1e-10

    def test_single_node_returns_value(self):
        assert divided_difference_nodes([2.0], [7.0]) == 7.0

    def test_coincident_unsorted_nodes_rejected(self):
        with pytest.raises(CoincidentNodesError):
            divided_difference_nodes([1.0, 0.0, 1.0], [1.0, 0.0, 1.0])


class TestTable:
    def test_table_shape_and_rows(self, x3):
        grid = sample_grid(x3, [0.0, 1.0, 2.0, 3.0, 4.0])
        table = build_table(grid, 3)
        assert [len(row) for row in table.entries] == [5, 4, 3, 2]
        assert table.entries[3] == pytest.approx([1.0, 1.0], abs=TOL_EXACT)
        assert table.entries[1] == pytest.approx([1.0, 7.0, 19.0, 37.0], abs=TOL_EXACT)

    def test_order_too_large(self, x3):
        grid = sample_grid(x3, [0.0, 1.0, 2.0])
        with pytest.raises(OrderTooLargeError):
            build_table(grid, 3)

    def test_insufficient_nodes_for_verdict(self, x3):
        grid = sample_grid(x3, [0.0, 1.0, 2.0])
        with pytest.raises(InsufficientNodesError):
            n_convexity_verdict(grid, 3)


# =============================================================================
# N-CONVEXITY VERDICTS
# =============================================================================

class TestConvexityVerdict:
    def test_cube_is_three_convex(self, x3):
        verdict = n_convexity_verdict(sample_grid(x3, np.linspace(0.0, 5.0, 20)), 3)
        assert verdict.holds is True
        assert verdict.order == 3
        assert len(verdict.witness) == 4

    def test_negated_cube_fails_with_window_witness(self):
        f = catalog("x3", scale=-1.0)
        grid = sample_grid(f, np.linspace(0.0, 5.0, 20))
        verdict = n_convexity_verdict(grid, 3)
        assert not verdict.holds
        assert abs(verdict.margin + 1.0) < 1e-9
        i = grid.xs.index(verdict.witness[0])
        assert verdict.witness == grid.xs[i:i + 4]

    def test_windows_decide_all_subsets(self, rng, random_models):
        """Consecutive windows give the same verdict as every (n+1)-subset."""
        models = random_models(20)
        for trial in range(40):
            gaps = rng.uniform(0.5, 1.5, 8)
            xs = np.cumsum(gaps) / np.sum(gaps)
            if trial % 2 == 0:
                ys = evaluate(models[trial // 2], xs)
            else:
                ys = rng.standard_normal(8)
            grid = SampleGrid(xs=xs.tolist(), ys=np.asarray(ys).tolist())
            verdict = n_convexity_verdict(grid, 3)
            brute = min(
                divided_difference_nodes(xs[list(subset)], np.asarray(ys)[list(subset)])
                for subset in itertools.combinations(range(8), 4)
            )
            if verdict.holds:
                assert brute >= -10.0 * verdict.tol, f"trial {trial}: subset minimum {brute} below windows"
            else:
                assert brute <= verdict.margin + TOL_EXACT, f"trial {trial}: window witness missed"

    def test_default_tol_scales_with_values(self):
        assert default_tol([0.0]) == pytest.approx(1e-9)
        assert default_tol([-100.0, 3.0]) == pytest.approx(101e-9)


class TestShapeWarnings:
    def test_no_warning_for_declared_shape(self):
        assert shape_warnings(catalog("sqrt"), 0.0, 4.0, [CONCAVE, THREE_CONVEX]) == []

    def test_concavity_warning_for_cube(self, x3):
        messages = shape_warnings(x3, 0.0, 3.0, [CONCAVE])
        assert len(messages) == 1
        assert messages[0].startswith("precondition: x3 is not concave")


# =============================================================================
# DIFFERENCE OPERATORS
# =============================================================================

class TestDifferences:
    def test_iterated_difference_of_cube(self, x3):
        value = iterated_difference(x3, 0.0, [0.1, 0.2, 0.3])
        assert abs(value - 0.036) < TOL_EXACT

    def test_iterated_difference_without_steps(self, x3):
        assert iterated_difference(x3, 2.0, []) == 8.0

    def test_iterated_difference_domain(self, x3):
        with pytest.raises(DomainError):
            iterated_difference(x3, 9.0, [0.5, 0.5, 0.5])

    def test_iterated_difference_negative_step(self, x3):
        with pytest.raises(ParameterError):
            iterated_difference(x3, 1.0, [0.1, -0.1])

    def test_equidistant_third_difference_of_cube(self, x3):
        assert abs(equidistant_third_difference(x3, 1.0, 0.5) - 0.75) < TOL_EXACT

    def test_quadratics_are_annihilated(self, rng):
        for trial in range(50):
            f = blocks(rng.uniform(-5.0, 5.0, 3).tolist(), [], (0.0, 1.0))
            xs = (np.arange(12) + rng.uniform(0.1, 0.9, 12)) / 12
            grid = sample_grid(f, xs)
            tol = default_tol(grid.ys)
            assert np.max(np.abs(build_table(grid, 3).entries[3])) <= tol, f"trial {trial}"
            steps = rng.uniform(0.0, 0.3, 3)
            t = rng.uniform(0.0, 1.0 - float(np.sum(steps)))
            assert abs(iterated_difference(f, t, steps)) <= tol, f"trial {trial}"

    def test_iterated_difference_matches_nested_steps(self, rng, random_models):
        def nested(f, t, steps):
            if not steps:
                return evaluate(f, t)
            return nested(f, t + steps[-1], steps[:-1]) - nested(f, t, steps[:-1])

        models = random_models(10) + [catalog("sinh", domain=(0.0, 1.0)), catalog("log1p", domain=(0.0, 1.0))]
        for f in models:
            for count in (1, 2, 3, 4):
                steps = rng.uniform(0.0, 0.2, count).tolist()
                t = rng.uniform(0.0, 1.0 - sum(steps))
                assert iterated_difference(f, t, steps) == pytest.approx(nested(f, t, steps), abs=1e-12)

    def test_equidistant_matches_iterated(self, rng):
        f = catalog("exp")
        for _ in range(20):
            h = rng.uniform(0.01, 1.0)
            x = rng.uniform(-5.0, 5.0 - 3.0 * h)
            expected = iterated_difference(f, x, [h, h, h])
            assert equidistant_third_difference(f, x, h) == pytest.approx(expected, abs=1e-10)

    def test_positive_differences_hold_for_log1p(self):
        report = positive_differences3_check(catalog("log1p"), 3.0)
        assert report.verdict
        assert report.cases == ["positive_differences_3"]

    def test_positive_differences_fail_for_sine(self):
        report = positive_differences3_check(catalog("sin"), 3.0)
        assert not report.verdict
        witness = report.witness
        assert witness["x"] + witness["y"] + witness["z"] + witness["t"] <= 3.0 + TOL_EXACT

    def test_positive_differences_random_points_seeded(self):
        policy = SamplingPolicy(lattice_points=4, random_points=200, seed=7)
        first = positive_differences3_check(catalog("log1p"), 2.0, policy)
        second = positive_differences3_check(catalog("log1p"), 2.0, policy)
        assert first == second
        assert first.details["seed"] == 7

    def test_positive_differences_domain_must_cover(self, x3):
        with pytest.raises(DomainError):
            positive_differences3_check(x3, 11.0)


class TestBennettIdentity:
    def test_cube_by_hand(self, x3):
        assert bennett_identity_residual(x3, 0.0, 1.0, 2.0, 3.0) < 1e-10

    def test_node_order_required(self, x3):
        with pytest.raises(ParameterError):
            bennett_identity_residual(x3, 0.0, 2.0, 1.0, 3.0)

    def test_kinked_block_model(self, random_models):
        model = random_models(3)[2]
        assert bennett_identity_residual(model, 0.05, 0.3, 0.6, 0.95) < TOL_BENNETT

    @pytest.mark.parametrize("name", BENNETT_ENTRIES)
    def test_random_quadruples(self, name, rng):
        f = catalog(name)
        lo, hi = f.domain
        for _ in range(50):
            gaps = rng.uniform(0.5, 1.5, 5)
            nodes = lo + (hi - lo) * np.cumsum(gaps)[:4] / np.sum(gaps)
            residual = bennett_identity_residual(f, *nodes)
            assert residual <= TOL_BENNETT, f"{name} at {nodes.tolist()}: residual {residual}"


# =============================================================================
# EQUIVALENT CHARACTERIZATIONS OF 3-CONVEXITY
# =============================================================================

def _characterizations(f):
    xs = np.linspace(0.0, 1.0, 48)
    by_divided = n_convexity_verdict(sample_grid(f, xs), 3).holds

    h = 0.05
    starts = np.linspace(0.0, 1.0 - 3.0 * h, 40)
    thirds = [equidistant_third_difference(f, x, h) for x in starts]
    by_equidistant = min(thirds) >= -default_tol(evaluate(f, xs))

    by_positive = positive_differences3_check(f, 1.0, SamplingPolicy(lattice_points=6, random_points=0)).verdict

    derivative = SampleGrid(xs=xs.tolist(), ys=np.asarray(evaluate(f, xs, 1)).tolist())
    by_derivative = n_convexity_verdict(derivative, 2).holds
    return [by_divided, by_equidistant, by_positive, by_derivative]


@pytest.mark.slow
class TestCharacterizationAgreement:
    def test_random_block_models(self, random_models):
        for i, model in enumerate(random_models(100)):
            verdicts = _characterizations(model)
            assert verdicts == [True] * 4, f"model {i}: {verdicts}"

    def test_negated_block_models(self, random_models):
        for i, model in enumerate(random_models(100)):
            verdicts = _characterizations(model.model_copy(update={"scale": -1.0}))
            assert verdicts == [False] * 4, f"negated model {i}: {verdicts}"
