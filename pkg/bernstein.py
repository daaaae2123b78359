"""
Bernstein operators on [a, b] and shape-preservation diagnostics.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from divided_differences import SampleGrid, default_tol, n_convexity_verdict, noise_tolerance
from errors import DomainError, ParameterError
from function_models import FunctionModel, evaluate
from schemas import InequalityReport

logger = logging.getLogger(__name__)


class BernsteinApproximant(BaseModel):
    model_config = ConfigDict(frozen=True)

    degree: int = Field(ge=0)
    node_values: List[float]
    interval: Tuple[float, float]

    @model_validator(mode='after')
    def validate_nodes(self):
        if len(self.node_values) != self.degree + 1:
            raise ParameterError(f"Degree {self.degree} needs {self.degree + 1} node values, got {len(self.node_values)}")
        a, b = self.interval
        if not a < b:
            raise ParameterError(f"Empty interval [{a}, {b}]")
        return self


def bernstein_approximant(
    f: FunctionModel,
    n: int,
    interval: Optional[Tuple[float, float]] = None,
) -> BernsteinApproximant:
    """Sample f at the n + 1 equispaced Bernstein nodes of the interval."""
    if n < 0:
        raise ParameterError(f"Degree must be nonnegative, got {n}")
    a, b = interval or f.domain
    nodes = np.linspace(a, b, n + 1)
    return BernsteinApproximant(
        degree=n,
        node_values=np.asarray(evaluate(f, nodes)).tolist(),
        interval=(float(a), float(b)),
    )


def bernstein_eval(approx: BernsteinApproximant, x):
    """Evaluate B_n(f) by the de Casteljau recurrence."""
    a, b = approx.interval
    points = np.atleast_1d(np.asarray(x, dtype=float))
    slack = 1e-12 * (1.0 + max(abs(a), abs(b)))
    if np.min(points) < a - slack or np.max(points) > b + slack:
        raise DomainError(f"Point outside [{a}, {b}]")
    t = np.clip((points - a) / (b - a), 0.0, 1.0)

    coefficients = np.repeat(np.asarray(approx.node_values, dtype=float)[:, None], t.size, axis=1)
    n = approx.degree
    for j in range(1, n + 1):
        coefficients[:n - j + 1] = (1.0 - t) * coefficients[:n - j + 1] + t * coefficients[1:n - j + 2]
    values = coefficients[0]
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def shape_preservation_report(
    f: FunctionModel,
    n: int,
    k: int,
    interval: Optional[Tuple[float, float]] = None,
    grid_points: Optional[int] = None,
    tol: Optional[float] = None,
) -> InequalityReport:
    """Order-k verdict for B_n(f) on a grid, with distance diagnostics."""
    if k < 0 or n < k:
        raise ParameterError(f"Need 0 <= k <= n, got n={n}, k={k}")
    a, b = interval or f.domain
    approx = bernstein_approximant(f, n, (a, b))
    xs = np.linspace(a, b, grid_points or settings.shape_grid_points)
    approximation = bernstein_eval(approx, xs)
    exact = np.asarray(evaluate(f, xs))

    grid = SampleGrid(xs=xs.tolist(), ys=approximation.tolist())
    if tol is None:
        tol = max(default_tol(grid.ys), noise_tolerance(grid, k, ulps=4.0 * (n + 1)))
    verdict = n_convexity_verdict(grid, k, tol)

    h = np.diff(xs)
    sup_distance = float(np.max(np.abs(approximation - exact)))
    derivative_distance = float(np.max(np.abs(np.diff(approximation) / h - np.diff(exact) / h)))

    report = InequalityReport.from_margin(
        verdict.margin,
        tol,
        witness={"window": verdict.witness},
        cases=[f"bernstein_order_{k}"],
        details={
            "degree": n,
            "interval": [a, b],
            "sup_distance": sup_distance,
            "derivative_sup_distance": derivative_distance,
        },
    )
    logger.info(f"B_{n} order-{k} verdict={report.verdict}, sup distance {sup_distance:.3e}")
    return report
