"""
Divided differences and difference operators.
The recursive table is the primary evaluation path; the product formula is kept as a diagnostic.
"""

import itertools
import logging
import math
from typing import Iterable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from errors import (
    CoincidentNodesError,
    DomainError,
    InsufficientNodesError,
    OrderTooLargeError,
    ParameterError,
    UnsortedDataError,
)
from function_models import (
    CONCAVE,
    CONVEX,
    NONDECREASING,
    NONINCREASING,
    THREE_CONCAVE,
    THREE_CONVEX,
    FunctionModel,
    breakpoints,
    evaluate,
)
from quadrature import quadrature
from schemas import ConvexityVerdict, InequalityReport

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps

# requirement -> (order, sign applied to the samples)
_SHAPE_ORDERS = {
    NONDECREASING: (1, 1.0),
    NONINCREASING: (1, -1.0),
    CONVEX: (2, 1.0),
    CONCAVE: (2, -1.0),
    THREE_CONVEX: (3, 1.0),
    THREE_CONCAVE: (3, -1.0),
}


class SampleGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    xs: List[float]
    ys: List[float]
    gap_min: Optional[float] = None

    @model_validator(mode='after')
    def validate_nodes(self):
        if len(self.xs) != len(self.ys):
            raise ParameterError(f"xs and ys differ in length ({len(self.xs)} vs {len(self.ys)})")
        if not self.xs:
            raise InsufficientNodesError("A grid needs at least one node")
        if len(self.xs) > 1:
            gaps = np.diff(np.asarray(self.xs, dtype=float))
            if np.any(gaps < 0):
                i = int(np.argmax(gaps < 0))
                raise UnsortedDataError(f"xs not ascending at index {i + 1}: {self.xs[i]} then {self.xs[i + 1]}")
            gap_min = self.effective_gap_min
            if np.any(gaps <= 0) or np.any(gaps < gap_min):
                i = int(np.argmin(gaps))
                raise CoincidentNodesError(f"Nodes {self.xs[i]} and {self.xs[i + 1]} closer than gap_min={gap_min:.3e}")
        return self

    @property
    def effective_gap_min(self) -> float:
        if self.gap_min is not None:
            return self.gap_min
        return settings.gap_min_rel * (self.xs[-1] - self.xs[0])

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.xs, dtype=float)

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.ys, dtype=float)

    def __len__(self) -> int:
        return len(self.xs)


class DividedDiffTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: int = Field(ge=0)
    entries: List[List[float]]

    @model_validator(mode='after')
    def validate_shape(self):
        if len(self.entries) != self.order + 1:
            raise ParameterError(f"Table of order {self.order} needs {self.order + 1} rows")
        width = len(self.entries[0])
        for k, row in enumerate(self.entries):
            if len(row) != width - k:
                raise ParameterError(f"Row {k} has {len(row)} entries, expected {width - k}")
        return self


def sample_grid(f: FunctionModel, xs: Sequence[float], gap_min: Optional[float] = None) -> SampleGrid:
    """Sample a model on the given abscissae."""
    xs = np.asarray(xs, dtype=float)
    return SampleGrid(xs=xs.tolist(), ys=np.asarray(evaluate(f, xs)).tolist(), gap_min=gap_min)


def product_form_difference(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Explicit sum of y_i / prod_{j != i}(x_i - x_j)."""
    return math.fsum(_product_terms(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)))


def _product_terms(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    diffs = x[:, None] - x[None, :]
    np.fill_diagonal(diffs, 1.0)
    return y / np.prod(diffs, axis=1)


def _recursive(x: np.ndarray, y: np.ndarray) -> float:
    column = y.copy()
    for k in range(1, len(x)):
        column = (column[1:] - column[:-1]) / (x[k:] - x[:-k])
    return float(column[0])


def divided_difference_nodes(xs: Sequence[float], ys: Sequence[float], gap_min: Optional[float] = None) -> float:
    """[x_0, ..., x_n; f] over distinct nodes given in any order."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.size == 0:
        raise ParameterError("Nodes and values must be non-empty and of equal length")
    if x.size == 1:
        return float(y[0])

    ordered = np.sort(x)
    gap = float(np.min(np.diff(ordered)))
    limit = settings.gap_min_rel * (ordered[-1] - ordered[0]) if gap_min is None else gap_min
    if gap <= 0 or gap < limit:
        raise CoincidentNodesError(f"Minimum node gap {gap:.3e} below gap_min={limit:.3e}")

    value = _recursive(x, y)
    terms = _product_terms(x, y)
    product = math.fsum(terms)
    disagreement = abs(value - product)
    floor = 1e3 * _EPS * float(np.sum(np.abs(terms)))
    if disagreement > max(settings.crosscheck_rel * max(abs(value), abs(product)), floor):
        logger.warning(f"Recursive and product-form divided differences disagree: {value!r} vs {product!r}")
    return value


def divided_difference(grid: SampleGrid) -> float:
    """Divided difference of the whole grid."""
    return divided_difference_nodes(grid.xs, grid.ys, grid.effective_gap_min)


def build_table(grid: SampleGrid, max_order: int) -> DividedDiffTable:
    """Triangular table of divided differences up to max_order."""
    if max_order < 0 or max_order >= len(grid):
        raise OrderTooLargeError(f"Order {max_order} needs more than the {len(grid)} available nodes")
    x = grid.x
    column = grid.y
    entries = [column.tolist()]
    for k in range(1, max_order + 1):
        column = (column[1:] - column[:-1]) / (x[k:] - x[:-k])
        entries.append(column.tolist())
    return DividedDiffTable(order=max_order, entries=entries)


def default_tol(values: Iterable[float]) -> float:
    """Verdict tolerance scaled by the magnitude of the values."""
    values = np.asarray(values, dtype=float)
    return settings.verdict_tol_rel * (1.0 + (float(np.max(np.abs(values))) if values.size else 0.0))


def noise_tolerance(grid: SampleGrid, n: int, ulps: float = 16.0) -> float:
    """Rounding floor of order-n divided differences of values accurate to a few ulps."""
    if n == 0 or len(grid) < 2:
        return ulps * _EPS * float(np.max(np.abs(grid.y)))
    h = float(np.min(np.diff(grid.x)))
    delta = ulps * _EPS * float(np.max(np.abs(grid.y)))
    return 2.0 ** n * delta / (math.factorial(n) * h ** n)


def n_convexity_verdict(grid: SampleGrid, n: int, tol: Optional[float] = None) -> ConvexityVerdict:
    """Decide n-convexity of sampled data from consecutive windows."""
    if n < 0:
        raise ParameterError(f"Order must be nonnegative, got {n}")
    if len(grid) < n + 1:
        raise InsufficientNodesError(f"Order {n} needs at least {n + 1} nodes, got {len(grid)}")
    tol = default_tol(grid.ys) if tol is None else tol
    row = np.asarray(build_table(grid, n).entries[n])
    i = int(np.argmin(row))
    margin = float(row[i])
    return ConvexityVerdict(
        order=n,
        holds=bool(margin >= -tol),
        margin=margin,
        witness=grid.xs[i:i + n + 1],
        tol=tol,
    )


def shape_warnings(
    f: FunctionModel,
    a: float,
    b: float,
    required: Iterable[str],
    points: Optional[int] = None,
) -> List[str]:
    """Re-check asserted shape preconditions on a small grid; returns warning messages."""
    grid = sample_grid(f, np.linspace(a, b, points or settings.precheck_points))
    messages = []
    for requirement in required:
        order, sign = _SHAPE_ORDERS[requirement]
        signed = SampleGrid(xs=grid.xs, ys=(sign * grid.y).tolist(), gap_min=grid.gap_min)
        verdict = n_convexity_verdict(signed, order)
        if not verdict.holds:
            label = f.name or f.kind
            message = f"precondition: {label} is not {requirement} on [{a}, {b}] (margin {verdict.margin:.3e})"
            logger.warning(message)
            messages.append(message)
    return messages


def iterated_difference(f: FunctionModel, t: float, steps: Sequence[float]) -> float:
    """Delta_{h_1} ... Delta_{h_n} f(t) by inclusion-exclusion over {0,1}^n."""
    steps = np.asarray(steps, dtype=float)
    if np.any(steps < 0):
        raise ParameterError(f"Steps must be nonnegative, got {steps.tolist()}")
    lo, hi = f.domain
    if t < lo or t + float(np.sum(steps)) > hi:
        raise DomainError(f"t + sum(steps) = {t + float(np.sum(steps))} leaves the domain [{lo}, {hi}]")
    n = len(steps)
    if n == 0:
        return float(evaluate(f, t))
    corners = np.array(list(itertools.product((0, 1), repeat=n)), dtype=float)
    signs = (-1.0) ** (n - corners.sum(axis=1))
    values = evaluate(f, t + corners @ steps)
    return math.fsum(signs * values)


def equidistant_third_difference(f: FunctionModel, x: float, h: float) -> float:
    """f(x+3h) - 3f(x+2h) + 3f(x+h) - f(x)."""
    v0, v1, v2, v3 = evaluate(f, np.array([x, x + h, x + 2 * h, x + 3 * h]))
    return math.fsum([v3, -3.0 * v2, 3.0 * v1, -v0])


class SamplingPolicy(BaseModel):
    model_config = ConfigDict(frozen=True)

    lattice_points: int = Field(default_factory=lambda: settings.lattice_points, ge=2)
    random_points: int = Field(default_factory=lambda: settings.random_points, ge=0)
    seed: int = Field(default_factory=lambda: settings.default_seed)


def _difference_samples(A: float, policy: SamplingPolicy) -> np.ndarray:
    axis = np.linspace(0.0, A, policy.lattice_points)
    mesh = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    lattice = mesh[mesh.sum(axis=1) <= A * (1.0 + 1e-12)]
    if policy.random_points == 0:
        return lattice
    rng = np.random.default_rng(policy.seed)
    uniform = rng.dirichlet(np.ones(5), size=policy.random_points)[:, :4] * A
    return np.vstack([lattice, uniform])


def positive_differences3_check(
    f: FunctionModel,
    A: float,
    sampler: Optional[SamplingPolicy] = None,
    tol: Optional[float] = None,
) -> InequalityReport:
    """Sample Delta_x Delta_y Delta_z f(t) over x + y + z + t <= A."""
    lo, hi = f.domain
    if lo > 0 or hi < A:
        raise DomainError(f"Model domain [{lo}, {hi}] does not cover [0, {A}]")
    sampler = sampler or SamplingPolicy()
    samples = _difference_samples(A, sampler)
    steps = samples[:, :3]
    base = samples[:, 3]

    corners = np.array(list(itertools.product((0, 1), repeat=3)), dtype=float)
    signs = (-1.0) ** (3 - corners.sum(axis=1))
    points = np.clip(base[:, None] + steps @ corners.T, 0.0, A)
    values = np.asarray(evaluate(f, points))
    differences = values @ signs

    tol = default_tol(values) if tol is None else tol
    i = int(np.argmin(differences))
    witness_values = values[i]
    report = InequalityReport.from_margin(
        float(differences[i]),
        tol,
        lhs=float(np.sum(witness_values[signs > 0])),
        rhs=float(np.sum(witness_values[signs < 0])),
        witness={"x": float(steps[i, 0]), "y": float(steps[i, 1]), "z": float(steps[i, 2]), "t": float(base[i])},
        cases=["positive_differences_3"],
        details={"samples": int(len(samples)), "seed": sampler.seed},
    )
    logger.info(f"Positive differences of order 3 on [0, {A}]: verdict={report.verdict}, margin={report.margin:.3e}")
    return report


def bennett_identity_residual(f: FunctionModel, a: float, b: float, c: float, d: float) -> float:
    """|[a,b,c,d; f] - three-term integral expression in f'|."""
    if not a < b < c < d:
        raise ParameterError(f"Nodes must satisfy a < b < c < d, got {(a, b, c, d)}")
    lo, hi = f.domain
    if a < lo or d > hi:
        raise DomainError(f"Nodes {(a, b, c, d)} leave the domain [{lo}, {hi}]")

    nodes = [a, b, c, d]
    difference = divided_difference_nodes(nodes, evaluate(f, np.array(nodes)))

    derivative = lambda x: evaluate(f, x, 1)
    kinks = breakpoints(f)
    left = quadrature.integrate(derivative, a, b, kinks)
    middle = quadrature.integrate(derivative, b, c, kinks)
    right = quadrature.integrate(derivative, c, d, kinks)

    expression = (
        left / ((b - a) * (c - a) * (d - a))
        - (c + d - a - b) / ((c - a) * (c - b) * (d - a) * (d - b)) * middle
        + right / ((d - a) * (d - b) * (d - c))
    )
    residual = abs(difference - expression)
    logger.debug(f"Bennett residual at {nodes}: {residual:.3e}")
    return residual
