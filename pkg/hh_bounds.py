"""
Hermite-Hadamard type bounds.

Covers barycenters, the classical and Fejer inequalities, the weighted inequality for
3-convex functions, the two-point bounds with constants 1/4 and 2/3, nested-interval
mean comparisons and the slope bounds for 3-convex functions.

Convexity and 3-convexity preconditions are asserted by the caller. They are re-checked
on a coarse grid and reported as warnings so that the checkers still run on functions
outside the guaranteed class.
"""

import logging
from typing import Callable, Dict, List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from divided_differences import default_tol, shape_warnings
from errors import MeasureError, ParameterError, WeightSpecError
from function_models import CONVEX, THREE_CONVEX, FunctionModel, breakpoints, evaluate
from ordering import DiscreteMeasure, condensation_dispersion, integrate, moment
from quadrature import quadrature
from schemas import InequalityReport

logger = logging.getLogger(__name__)

FejerDensity = Literal["uniform", "triangular", "parabolic"]


class WeightSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: Literal["linear", "odd_power", "cos"] = "linear"
    exponent: int = Field(default=1, ge=1)  # n in 2n x^(2n-1)

    def w(self, x: np.ndarray, a: float, b: float) -> np.ndarray:
        if self.name == "linear":
            return a + b - 2.0 * x
        if self.name == "odd_power":
            n = self.exponent
            return 2.0 * n * x ** (2 * n - 1)
        return np.cos(x)

    def W(self, x: np.ndarray, a: float, b: float) -> np.ndarray:
        if self.name == "linear":
            return (x - a) * (b - x)
        if self.name == "odd_power":
            return x ** (2 * self.exponent)
        return np.sin(x)


def validate_weight(spec: WeightSpec, a: float, b: float, points: int = 64) -> None:
    """Check W' = w, W >= 0 and the symmetry of W about the midpoint."""
    xs = np.linspace(a, b, points)
    W = spec.W(xs, a, b)
    w = spec.w(xs, a, b)
    tol = 1e-9 * (1.0 + float(np.max(np.abs(W))))

    if np.min(W) < -tol:
        raise WeightSpecError(f"Primitive of {spec.name} is negative on [{a}, {b}]")
    asymmetry = float(np.max(np.abs(W - spec.W(a + b - xs, a, b))))
    if asymmetry > tol:
        raise WeightSpecError(f"Primitive of {spec.name} is not symmetric on [{a}, {b}] (deviation {asymmetry:.3e})")

    inner = xs[1:-1]
    h = np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + np.abs(inner))
    slope = (spec.W(inner + h, a, b) - spec.W(inner - h, a, b)) / (2.0 * h)
    mismatch = float(np.max(np.abs(slope - w[1:-1])))
    if mismatch > 1e-6 * (1.0 + float(np.max(np.abs(w)))):
        raise WeightSpecError(f"W' differs from w by {mismatch:.3e} for {spec.name}")


def _integral(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, f: Optional[FunctionModel] = None) -> float:
    return quadrature.integrate(fn, a, b, breakpoints(f) if f is not None else ())


def _check_interval(a: float, b: float) -> None:
    if not a < b:
        raise ParameterError(f"Need a < b, got {(a, b)}")


def _two_sided(
    left: float,
    middle: float,
    right: float,
    cases: List[str],
    warnings: List[str],
    witness: Dict,
    details: Optional[Dict] = None,
    tol: Optional[float] = None,
) -> InequalityReport:
    lower_margin = middle - left
    upper_margin = right - middle
    tol = default_tol([left, middle, right]) if tol is None else tol
    return InequalityReport.from_margin(
        min(lower_margin, upper_margin),
        tol,
        lhs=left,
        rhs=right,
        witness=witness,
        cases=cases,
        warnings=warnings,
        details={"middle": middle, "lower_margin": lower_margin, "upper_margin": upper_margin, **(details or {})},
    )


def integral_mean(f: FunctionModel, a: float, b: float) -> float:
    """(1 / (b - a)) times the integral of f over [a, b]."""
    _check_interval(a, b)
    evaluate(f, np.array([a, b]))
    return _integral(lambda x: evaluate(f, x), a, b, f) / (b - a)


def barycenter(mu: DiscreteMeasure) -> float:
    """First moment of a probability measure."""
    if mu.kind != "probability":
        raise MeasureError("Barycenter needs a probability measure")
    return moment(mu, 1)


def hh_classical_check(f: FunctionModel, mu: DiscreteMeasure, a: float, b: float) -> InequalityReport:
    """f(bar) <= int f dmu <= the chord value at bar."""
    _check_interval(a, b)
    lo, hi = mu.support
    if lo < a or hi > b:
        raise MeasureError(f"Support [{lo}, {hi}] outside [{a}, {b}]")
    warnings = shape_warnings(f, a, b, [CONVEX])

    center = barycenter(mu)
    fa, fb, fc = evaluate(f, np.array([a, b, center]))
    chord = ((b - center) * fa + (center - a) * fb) / (b - a)
    report = _two_sided(fc, integrate(f, mu), chord, ["hh_classical"], warnings, {"barycenter": center})
    logger.info(f"Classical HH on [{a}, {b}]: verdict={report.verdict}, margin={report.margin:.3e}")
    return report


def _fejer_density(density: FejerDensity, a: float, b: float) -> Callable[[np.ndarray], np.ndarray]:
    width = b - a
    if density == "uniform":
        return lambda x: np.full_like(x, 1.0 / width)
    if density == "triangular":
        return lambda x: (2.0 / width) * (1.0 - np.abs(2.0 * x - a - b) / width)
    return lambda x: 6.0 * (x - a) * (b - x) / width ** 3


def fejer_check(f: FunctionModel, a: float, b: float, density: FejerDensity = "uniform") -> InequalityReport:
    """f((a+b)/2) <= int f p <= (f(a)+f(b))/2 for a symmetric probability density p."""
    _check_interval(a, b)
    warnings = shape_warnings(f, a, b, [CONVEX])
    p = _fejer_density(density, a, b)
    kinks = breakpoints(f) + [(a + b) / 2.0]
    weighted = quadrature.integrate(lambda x: evaluate(f, x) * p(x), a, b, kinks)
    fa, fb, fm = evaluate(f, np.array([a, b, (a + b) / 2.0]))
    return _two_sided(fm, weighted, (fa + fb) / 2.0, ["fejer", density], warnings, {"a": a, "b": b})


def bp_bounds_check(f: FunctionModel, a: float, b: float) -> InequalityReport:
    """Two-point bounds around the integral mean of a 3-convex function."""
    _check_interval(a, b)
    warnings = shape_warnings(f, a, b, [THREE_CONVEX])
    condensation, dispersion = condensation_dispersion(a, b)
    lower = integrate(f, condensation)
    upper = integrate(f, dispersion)
    mean = integral_mean(f, a, b)
    report = _two_sided(
        lower,
        mean,
        upper,
        ["bp_bounds"],
        warnings,
        {"a": a, "b": b},
        {"condensation_node": (a + 2.0 * b) / 3.0, "dispersion_node": (2.0 * a + b) / 3.0},
    )
    logger.info(f"Two-point bounds on [{a}, {b}]: {lower:.6g} <= {mean:.6g} <= {upper:.6g}")
    return report


def chain_check(f: FunctionModel, a: float, b: float) -> InequalityReport:
    """Five-term chain for functions that are both convex and 3-convex."""
    _check_interval(a, b)
    warnings = shape_warnings(f, a, b, [CONVEX, THREE_CONVEX])
    condensation, dispersion = condensation_dispersion(a, b)
    fa, fb, fm = evaluate(f, np.array([a, b, (a + b) / 2.0]))
    terms = [fm, integrate(f, condensation), integral_mean(f, a, b), integrate(f, dispersion), (fa + fb) / 2.0]
    names = ["midpoint", "condensation", "mean", "dispersion", "trapezoid"]
    margins = [terms[i + 1] - terms[i] for i in range(4)]
    return InequalityReport.from_margin(
        min(margins),
        default_tol(terms),
        lhs=terms[0],
        rhs=terms[-1],
        witness={"a": a, "b": b},
        cases=[f"{names[i]}<={names[i + 1]}" for i in range(4)],
        warnings=warnings,
        details={"terms": dict(zip(names, terms)), "margins": margins},
    )


def weighted_3convex_check(f: FunctionModel, spec: WeightSpec, a: float, b: float) -> InequalityReport:
    """Weighted bounds on int f w - [f W] for 3-convex f."""
    _check_interval(a, b)
    validate_weight(spec, a, b)
    warnings = shape_warnings(f, a, b, [THREE_CONVEX])

    W_integral = quadrature.integrate(lambda x: spec.W(x, a, b), a, b)
    weighted = _integral(lambda x: evaluate(f, x) * spec.w(x, a, b), a, b, f)
    fa, fb = evaluate(f, np.array([a, b]))
    Wa, Wb = spec.W(np.array([a, b]), a, b)
    middle = weighted - (fb * Wb - fa * Wa)

    da, db, dm = evaluate(f, np.array([a, b, (a + b) / 2.0]), 1)
    left = -((da + db) / 2.0) * W_integral
    right = -dm * W_integral
    return _two_sided(left, middle, right, ["weighted", spec.name], warnings, {"a": a, "b": b}, {"W_integral": W_integral})


def _nested_epsilons(a: float, b: float, eps: Optional[float]) -> Sequence[float]:
    half = (b - a) / 2.0
    if eps is None:
        return [factor * half for factor in (0.1, 0.25, 0.4)]
    if not 0 < eps < half:
        raise ParameterError(f"eps={eps} outside (0, {half})")
    return [eps]


def nested_mean_checks(f: FunctionModel, a: float, b: float, eps: Optional[float] = None) -> InequalityReport:
    """Mean comparisons over nested intervals with a common midpoint."""
    _check_interval(a, b)
    epsilons = _nested_epsilons(a, b, eps)
    warnings = shape_warnings(f, a, b, [CONVEX])
    integral = lambda lo, hi: _integral(lambda x: evaluate(f, x), lo, hi, f)
    mean = integral(a, b) / (b - a)

    margins: Dict[str, float] = {}
    values: List[float] = [mean]
    for e in epsilons:
        inner = integral(a + e, b - e) / (b - a - 2.0 * e)
        strip = (integral(a, a + e) + integral(b - e, b)) / (2.0 * e)
        margins[f"shrink eps={e:g}"] = mean - inner
        margins[f"strip eps={e:g}"] = strip - mean
        values += [inner, strip]

    quarters = 4.0 / (b - a) * (integral(a, (3.0 * a + b) / 4.0) + integral((a + 3.0 * b) / 4.0, b))
    middle_third = 3.0 / (b - a) * integral((2.0 * a + b) / 3.0, (a + 2.0 * b) / 3.0)
    margins["combined upper"] = quarters - mean
    margins["combined lower"] = mean - middle_third
    values += [quarters, middle_third]

    worst = min(margins, key=margins.get)
    return InequalityReport.from_margin(
        margins[worst],
        default_tol(values),
        lhs=middle_third,
        rhs=quarters,
        witness={"case": worst, "epsilons": list(epsilons)},
        cases=list(margins),
        warnings=warnings,
        details={"mean": mean, "margins": margins},
    )


def slope_bounds_check(f: FunctionModel, a: float, b: float) -> InequalityReport:
    """f'((a+b)/2) <= (f(b)-f(a))/(b-a) <= ((f'(a)+f'(b))/2 + f'((a+b)/2)) / 2."""
    _check_interval(a, b)
    warnings = shape_warnings(f, a, b, [THREE_CONVEX])
    fa, fb = evaluate(f, np.array([a, b]))
    da, db, dm = evaluate(f, np.array([a, b, (a + b) / 2.0]), 1)
    secant = (fb - fa) / (b - a)
    right = 0.5 * ((da + db) / 2.0 + dm)
    report = _two_sided(dm, secant, right, ["slope_bounds"], warnings, {"a": a, "b": b})
    logger.info(f"Slope bounds on [{a}, {b}]: {dm:.12g} <= {secant:.12g} <= {right:.12g}")
    return report


def rigidity_check(f: FunctionModel, a: float, b: float) -> InequalityReport:
    """f(a) >= 0 and f((a+2b)/3) >= 0 imply a nonnegative mean for 3-convex f."""
    _check_interval(a, b)
    warnings = shape_warnings(f, a, b, [THREE_CONVEX])
    node = (a + 2.0 * b) / 3.0
    fa, fc = evaluate(f, np.array([a, node]))
    mean = integral_mean(f, a, b)
    premise = min(fa, fc) >= 0
    margin = mean if premise else -min(fa, fc)
    return InequalityReport.from_margin(
        margin,
        default_tol([fa, fc, mean]),
        lhs=[fa, fc],
        rhs=mean,
        witness={"a": a, "node": node},
        cases=["rigidity", "premise_holds" if premise else "premise_fails"],
        warnings=warnings,
        details={"premise": premise, "mean": mean},
    )
