"""
Evaluable function models.
A model is either a catalog entry with analytic derivatives where available, or a
building-block form quadratic + sum of c_i * ((x - a_i)_+)^2 with c_i >= 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import settings
from errors import DomainError, InterpolationError, ParameterError, VerificationError
from schemas import InequalityReport

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Evaluator = Callable[[np.ndarray, float], np.ndarray]

_EPS = np.finfo(float).eps

# Property flags
NONDECREASING = "nondecreasing"
NONINCREASING = "nonincreasing"
CONVEX = "convex"
CONCAVE = "concave"
THREE_CONVEX = "3convex"
THREE_CONCAVE = "3concave"
BERNSTEIN = "bernstein"
COMPLETELY_MONOTONE = "completely_monotone"
NONNEGATIVE = "nonnegative"

_BERNSTEIN_FLAGS = frozenset({NONDECREASING, CONCAVE, THREE_CONVEX, BERNSTEIN, NONNEGATIVE})
_CM_FLAGS = frozenset({NONINCREASING, CONVEX, THREE_CONCAVE, COMPLETELY_MONOTONE, NONNEGATIVE})
_SIGN_SWAP = {
    NONDECREASING: NONINCREASING,
    NONINCREASING: NONDECREASING,
    CONVEX: CONCAVE,
    CONCAVE: CONVEX,
    THREE_CONVEX: THREE_CONCAVE,
    THREE_CONCAVE: THREE_CONVEX,
}
_ALL_SHAPES = frozenset(_SIGN_SWAP)


@dataclass(frozen=True)
class CatalogEntry:
    value: Evaluator
    derivatives: Tuple[Evaluator, ...] = ()
    domain: Tuple[float, float] = (0.0, 10.0)
    flags: Callable[[float], FrozenSet[str]] = field(default=lambda alpha: frozenset())
    default_alpha: Optional[float] = None
    alpha_range: Optional[Tuple[float, float]] = None  # open below, closed above
    coeffs: Optional[Tuple[float, ...]] = None


def _fixed(flags: FrozenSet[str]) -> Callable[[float], FrozenSet[str]]:
    return lambda alpha: flags


def _power_flags(alpha: float) -> FrozenSet[str]:
    flags = {NONDECREASING, NONNEGATIVE}
    if alpha <= 1:
        flags.add(CONCAVE)
    if alpha >= 1:
        flags.add(CONVEX)
    if alpha <= 1 or alpha >= 2:
        flags.add(THREE_CONVEX)
    if 1 <= alpha <= 2:
        flags.add(THREE_CONCAVE)
    if alpha <= 1:
        flags.add(BERNSTEIN)
    return frozenset(flags)


def _safe_div(num: np.ndarray, den: np.ndarray, at_zero: float) -> np.ndarray:
    """num / den with a continuous extension where den == 0."""
    zero = den == 0
    return np.where(zero, at_zero, num / np.where(zero, 1.0, den))


def _neg_xlogx(x, alpha):
    return np.where(x > 0, -x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def _log_mean(x, alpha):
    # (x - 1) / log x, extended by 0 at x = 0 and 1 at x = 1
    t = x - 1.0
    inner = _safe_div(t, np.log1p(np.where(x > 0, t, 0.0)), 1.0)
    return np.where(x > 0, inner, 0.0)


def _log1p_over_x(x, alpha):
    return _safe_div(np.log1p(x), x, 1.0)


def _poly(coeffs: Tuple[float, ...], order: int) -> Evaluator:
    derived = np.polynomial.polynomial.polyder(np.asarray(coeffs, dtype=float), order) if order else np.asarray(coeffs, dtype=float)
    return lambda x, alpha: np.polynomial.polynomial.polyval(x, derived)


def _poly_entry(coeffs: Tuple[float, ...], domain: Tuple[float, float], flags: FrozenSet[str]) -> CatalogEntry:
    return CatalogEntry(
        value=_poly(coeffs, 0),
        derivatives=tuple(_poly(coeffs, k) for k in (1, 2, 3)),
        domain=domain,
        flags=_fixed(flags),
        coeffs=coeffs,
    )


CATALOG: Dict[str, CatalogEntry] = {
    "x_over_1px": CatalogEntry(
        value=lambda x, a: x / (1.0 + x),
        derivatives=(
            lambda x, a: 1.0 / (1.0 + x) ** 2,
            lambda x, a: -2.0 / (1.0 + x) ** 3,
            lambda x, a: 6.0 / (1.0 + x) ** 4,
        ),
        flags=_fixed(_BERNSTEIN_FLAGS),
    ),
    "one_minus_exp": CatalogEntry(
        value=lambda x, a: -np.expm1(-a * x),
        derivatives=(
            lambda x, a: a * np.exp(-a * x),
            lambda x, a: -a ** 2 * np.exp(-a * x),
            lambda x, a: a ** 3 * np.exp(-a * x),
        ),
        flags=_fixed(_BERNSTEIN_FLAGS),
        default_alpha=1.0,
        alpha_range=(0.0, np.inf),
    ),
    "log1p": CatalogEntry(
        value=lambda x, a: np.log1p(x),
        derivatives=(
            lambda x, a: 1.0 / (1.0 + x),
            lambda x, a: -1.0 / (1.0 + x) ** 2,
            lambda x, a: 2.0 / (1.0 + x) ** 3,
        ),
        flags=_fixed(_BERNSTEIN_FLAGS),
    ),
    "neg_xlogx": CatalogEntry(
        value=_neg_xlogx,
        derivatives=(
            lambda x, a: -np.log(x) - 1.0,
            lambda x, a: -1.0 / x,
            lambda x, a: 1.0 / x ** 2,
        ),
        domain=(0.0, 5.0),
        flags=_fixed(frozenset({CONCAVE, THREE_CONVEX})),
    ),
    "log_mean": CatalogEntry(
        value=_log_mean,
        flags=_fixed(_BERNSTEIN_FLAGS),
    ),
    "power": CatalogEntry(
        value=lambda x, a: x ** a,
        derivatives=(
            lambda x, a: a * x ** (a - 1.0),
            lambda x, a: a * (a - 1.0) * x ** (a - 2.0),
            lambda x, a: a * (a - 1.0) * (a - 2.0) * x ** (a - 3.0),
        ),
        flags=_power_flags,
        default_alpha=0.5,
        alpha_range=(0.0, np.inf),
    ),
    "neg_sq_plus_sqrt": CatalogEntry(
        value=lambda x, a: -x ** 2 + np.sqrt(x),
        derivatives=(
            lambda x, a: -2.0 * x + 0.5 / np.sqrt(x),
            lambda x, a: -2.0 - 0.25 * x ** -1.5,
            lambda x, a: 0.375 * x ** -2.5,
        ),
        domain=(0.0, 1.5),
        flags=_fixed(frozenset({CONCAVE, THREE_CONVEX})),
    ),
    "sinh": CatalogEntry(
        value=lambda x, a: np.sinh(x),
        derivatives=(
            lambda x, a: np.cosh(x),
            lambda x, a: np.sinh(x),
            lambda x, a: np.cosh(x),
        ),
        domain=(-4.0, 4.0),
        flags=_fixed(frozenset({NONDECREASING, THREE_CONVEX})),
    ),
    "cosh": CatalogEntry(
        value=lambda x, a: np.cosh(x),
        derivatives=(
            lambda x, a: np.sinh(x),
            lambda x, a: np.cosh(x),
            lambda x, a: np.sinh(x),
        ),
        domain=(0.0, 4.0),
        flags=_fixed(frozenset({NONDECREASING, CONVEX, THREE_CONVEX, NONNEGATIVE})),
    ),
    "exp": CatalogEntry(
        value=lambda x, a: np.exp(x),
        derivatives=(
            lambda x, a: np.exp(x),
            lambda x, a: np.exp(x),
            lambda x, a: np.exp(x),
        ),
        domain=(-5.0, 5.0),
        flags=_fixed(frozenset({NONDECREASING, CONVEX, THREE_CONVEX, NONNEGATIVE})),
    ),
    "exp_neg": CatalogEntry(
        value=lambda x, a: np.exp(-x),
        derivatives=(
            lambda x, a: -np.exp(-x),
            lambda x, a: np.exp(-x),
            lambda x, a: -np.exp(-x),
        ),
        flags=_fixed(_CM_FLAGS),
    ),
    "inv_1px": CatalogEntry(
        value=lambda x, a: 1.0 / (1.0 + x),
        derivatives=(
            lambda x, a: -1.0 / (1.0 + x) ** 2,
            lambda x, a: 2.0 / (1.0 + x) ** 3,
            lambda x, a: -6.0 / (1.0 + x) ** 4,
        ),
        flags=_fixed(_CM_FLAGS),
    ),
    "log1p_over_x": CatalogEntry(
        value=_log1p_over_x,
        flags=_fixed(_CM_FLAGS),
    ),
    "sin": CatalogEntry(
        value=lambda x, a: np.sin(x),
        derivatives=(
            lambda x, a: np.cos(x),
            lambda x, a: -np.sin(x),
            lambda x, a: -np.cos(x),
        ),
        domain=(0.0, 2.0 * np.pi),
    ),
    "cube_sixth_minus_sin": CatalogEntry(
        value=lambda x, a: x ** 3 / 6.0 - np.sin(x),
        derivatives=(
            lambda x, a: x ** 2 / 2.0 - np.cos(x),
            lambda x, a: x + np.sin(x),
            lambda x, a: 1.0 + np.cos(x),
        ),
        domain=(0.0, 2.0 * np.pi),
        flags=_fixed(frozenset({CONVEX, THREE_CONVEX})),
    ),
    # 1 - (x - 3) + (x - 3)^3 / 6: 3-convex without monotonicity, convexity or sign
    "shifted_cubic": _poly_entry((-0.5, 3.5, -1.5, 1.0 / 6.0), (0.0, 6.0), frozenset({THREE_CONVEX})),
    "x2": _poly_entry((0.0, 0.0, 1.0), (-10.0, 10.0), frozenset({CONVEX, THREE_CONVEX, THREE_CONCAVE, NONNEGATIVE})),
    "x3": _poly_entry((0.0, 0.0, 0.0, 1.0), (0.0, 10.0), frozenset({NONDECREASING, CONVEX, THREE_CONVEX, NONNEGATIVE})),
    "x4": _poly_entry((0.0, 0.0, 0.0, 0.0, 1.0), (0.0, 10.0), frozenset({NONDECREASING, CONVEX, THREE_CONVEX, NONNEGATIVE})),
    "sqrt": CatalogEntry(
        value=lambda x, a: np.sqrt(x),
        derivatives=(
            lambda x, a: 0.5 / np.sqrt(x),
            lambda x, a: -0.25 * x ** -1.5,
            lambda x, a: 0.375 * x ** -2.5,
        ),
        flags=_fixed(_power_flags(0.5)),
    ),
}

POLY_DOMAIN = (-10.0, 10.0)


class Knot(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float
    c: float


class FunctionModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["catalog", "blocks"]
    name: Optional[str] = None
    alpha: Optional[float] = None
    coeffs: Optional[List[float]] = None
    quad: List[float] = [0.0, 0.0, 0.0]
    knots: List[Knot] = []
    domain: Tuple[float, float]
    scale: float = 1.0
    offset: float = 0.0
    power: Optional[float] = None

    @model_validator(mode='before')
    @classmethod
    def fill_domain(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("domain") is None and data.get("kind") == "catalog":
            data = dict(data)
            name = data.get("name")
            if name == "poly":
                data["domain"] = POLY_DOMAIN
            elif name in CATALOG:
                data["domain"] = CATALOG[name].domain
            else:
                raise ParameterError(f"Unknown catalog entry: {name}")
        return data

    @field_validator("knots")
    @classmethod
    def sort_knots(cls, knots: List[Knot]) -> List[Knot]:
        return sorted(knots, key=lambda knot: knot.a)

    @model_validator(mode='after')
    def validate_model(self):
        lo, hi = self.domain
        if not lo < hi:
            raise ParameterError(f"Empty domain [{lo}, {hi}]")
        if self.kind == "catalog":
            if self.name == "poly":
                if not self.coeffs:
                    raise ParameterError("poly requires a non-empty coefficient list")
            elif self.name not in CATALOG:
                raise ParameterError(f"Unknown catalog entry: {self.name}")
            else:
                entry = CATALOG[self.name]
                if self.alpha is not None:
                    if entry.alpha_range is None:
                        raise ParameterError(f"Catalog entry {self.name} takes no alpha")
                    low, high = entry.alpha_range
                    if not low < self.alpha <= high:
                        raise ParameterError(f"alpha={self.alpha} outside ({low}, {high}] for {self.name}")
        else:
            if len(self.quad) != 3:
                raise ParameterError("blocks require exactly three quadratic coefficients")
            for knot in self.knots:
                if knot.c < 0:
                    raise ParameterError(f"Knot weight {knot.c} at {knot.a} is negative")
                if not lo <= knot.a <= hi:
                    raise ParameterError(f"Knot {knot.a} outside domain [{lo}, {hi}]")
        if self.power is not None and self.power <= 0:
            raise ParameterError(f"power must be positive, got {self.power}")
        return self

    def __call__(self, x: ArrayLike) -> ArrayLike:
        return evaluate(self, x)

    def derivative(self, x: ArrayLike, order: int = 1) -> ArrayLike:
        return evaluate(self, x, order)

    @property
    def lo(self) -> float:
        return self.domain[0]

    @property
    def hi(self) -> float:
        return self.domain[1]

    @property
    def effective_alpha(self) -> Optional[float]:
        if self.kind == "catalog" and self.name in CATALOG and self.alpha is None:
            return CATALOG[self.name].default_alpha
        return self.alpha


class Parabola(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: float
    value: float
    slope: float
    curvature: float  # y in f(a) + (x-a) f'(a) + ((x-a)^2 / 2) y
    side: Literal["left", "right"]

    def __call__(self, x: ArrayLike) -> ArrayLike:
        d = np.asarray(x, dtype=float) - self.center
        result = self.value + self.slope * d + 0.5 * self.curvature * d * d
        return float(result) if np.ndim(x) == 0 else result


def catalog(name: str, **fields: Any) -> FunctionModel:
    """Shorthand for a catalog model."""
    return FunctionModel(kind="catalog", name=name, **fields)


def blocks(quad: List[float], knots: List[Tuple[float, float]], domain: Tuple[float, float]) -> FunctionModel:
    """Shorthand for a building-block model."""
    return FunctionModel(kind="blocks", quad=list(quad), knots=[Knot(a=a, c=c) for a, c in knots], domain=domain)


def breakpoints(model: FunctionModel) -> List[float]:
    """Locations where the model is only C^1."""
    return [knot.a for knot in model.knots] if model.kind == "blocks" else []


def declared_flags(model: FunctionModel) -> FrozenSet[str]:
    """Property flags of the model after power and scale."""
    if model.kind == "blocks":
        flags = {THREE_CONVEX}
        if not model.knots:
            flags.add(THREE_CONCAVE)
        if model.quad[2] >= 0:
            flags.add(CONVEX)
        base = frozenset(flags)
    elif model.name == "poly":
        base = frozenset()
    else:
        base = CATALOG[model.name].flags(model.effective_alpha)

    if model.power is not None and model.power != 1.0:
        keeps = {NONDECREASING, CONCAVE, THREE_CONVEX, NONNEGATIVE}
        if keeps <= base and model.power < 1.0:
            base = frozenset(keeps)
        else:
            base = frozenset({NONNEGATIVE} & base)

    if model.scale == 0:
        return _ALL_SHAPES | ({NONNEGATIVE} if model.offset >= 0 else frozenset())
    if model.scale < 0:
        base = frozenset(_SIGN_SWAP[flag] for flag in base if flag in _SIGN_SWAP)
    if model.offset < 0:
        base = base - {NONNEGATIVE, BERNSTEIN, COMPLETELY_MONOTONE}
    return base


def _blocks_raw(model: FunctionModel, x: np.ndarray, order: int, right: bool = True) -> np.ndarray:
    c0, c1, c2 = model.quad
    if model.knots:
        a = np.array([knot.a for knot in model.knots])
        c = np.array([knot.c for knot in model.knots])
        diff = x[..., None] - a
    if order == 0:
        result = c0 + c1 * x + c2 * x * x
        if model.knots:
            result = result + np.sum(c * np.maximum(diff, 0.0) ** 2, axis=-1)
    elif order == 1:
        result = c1 + 2.0 * c2 * x
        if model.knots:
            result = result + np.sum(2.0 * c * np.maximum(diff, 0.0), axis=-1)
    elif order == 2:
        result = np.full_like(x, 2.0 * c2)
        if model.knots:
            active = diff >= 0 if right else diff > 0
            result = result + np.sum(2.0 * c * active, axis=-1)
    else:
        result = np.zeros_like(x)
    return result


def _base_raw(model: FunctionModel, x: np.ndarray, order: int) -> Optional[np.ndarray]:
    if model.kind == "blocks":
        return _blocks_raw(model, x, order)
    if model.name == "poly":
        return _poly(tuple(model.coeffs), order)(x, 0.0)
    entry = CATALOG[model.name]
    if order == 0:
        return entry.value(x, model.effective_alpha)
    if len(entry.derivatives) < order:
        return None
    return entry.derivatives[order - 1](x, model.effective_alpha)


def _compose_power(g: List[np.ndarray], p: float, order: int) -> np.ndarray:
    g0 = g[0]
    if order == 0:
        return g0 ** p
    if order == 1:
        return p * g0 ** (p - 1) * g[1]
    if order == 2:
        return p * (p - 1) * g0 ** (p - 2) * g[1] ** 2 + p * g0 ** (p - 1) * g[2]
    return (
        p * (p - 1) * (p - 2) * g0 ** (p - 3) * g[1] ** 3
        + 3 * p * (p - 1) * g0 ** (p - 2) * g[1] * g[2]
        + p * g0 ** (p - 1) * g[3]
    )


def _analytic(model: FunctionModel, x: np.ndarray, order: int) -> Optional[np.ndarray]:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if model.power is None:
            raw = _base_raw(model, x, order)
            if raw is None:
                return None
        else:
            g = []
            for k in range(order + 1):
                part = _base_raw(model, x, k)
                if part is None:
                    return None
                g.append(part)
            raw = _compose_power(g, model.power, order)
        result = model.scale * raw
        if order == 0:
            result = result + model.offset
        return np.asarray(result, dtype=float)


# (offset, weight) pairs; denominators h**order
_CENTRAL = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
}
_FORWARD = {
    1: (-1.5, 2.0, -0.5),
    2: (2.0, -5.0, 4.0, -1.0),
    3: (-2.5, 9.0, -12.0, 7.0, -1.5),
}


def _finite_difference(model: FunctionModel, x: np.ndarray, order: int) -> np.ndarray:
    value = lambda pts: _analytic(model, pts, 0)
    h = _EPS ** (1.0 / (order + 2)) * (1.0 + np.abs(x))
    lo, hi = model.domain
    reach_central = max(abs(offset) for offset, _ in _CENTRAL[order])
    reach_forward = len(_FORWARD[order]) - 1

    central = (x - reach_central * h >= lo) & (x + reach_central * h <= hi)
    forward = ~central & (x + reach_forward * h <= hi)
    backward = ~central & ~forward

    result = np.empty_like(x)
    if np.any(central):
        xc, hc = x[central], h[central]
        result[central] = sum(w * value(xc + k * hc) for k, w in _CENTRAL[order]) / hc ** order
    for mask, direction in ((forward, 1.0), (backward, -1.0)):
        if np.any(mask):
            xs, hs = x[mask], h[mask]
            total = sum(w * value(xs + direction * k * hs) for k, w in enumerate(_FORWARD[order]))
            result[mask] = direction ** order * total / hs ** order
    return result


def _check_domain(model: FunctionModel, x: np.ndarray) -> np.ndarray:
    lo, hi = model.domain
    slack = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
    if x.size and (np.min(x) < lo - slack or np.max(x) > hi + slack or np.any(np.isnan(x))):
        raise DomainError(f"Point outside domain [{lo}, {hi}] of model {model.name or model.kind}")
    return np.clip(x, lo, hi)


def evaluate(model: FunctionModel, x: ArrayLike, derivative_order: int = 0) -> ArrayLike:
    """Evaluate the model or one of its first three derivatives."""
    if not 0 <= derivative_order <= 3:
        raise ParameterError(f"derivative_order must be in 0..3, got {derivative_order}")
    points = _check_domain(model, np.atleast_1d(np.asarray(x, dtype=float)))
    values = _analytic(model, points, derivative_order)
    if values is None:
        values = _finite_difference(model, points, derivative_order)
    values = np.array(np.broadcast_to(values, points.shape))
    return float(values[0]) if np.ndim(x) == 0 else values.reshape(np.shape(x))


def second_derivative_one_sided(model: FunctionModel, a: float, side: Literal["left", "right"]) -> float:
    """One-sided second derivative at a."""
    point = _check_domain(model, np.array([a], dtype=float))
    if model.kind == "blocks" and model.power is None:
        return float(model.scale * _blocks_raw(model, point, 2, right=(side == "right"))[0])
    analytic = _analytic(model, point, 2)
    if analytic is not None:
        return float(analytic[0])
    h = _EPS ** 0.25 * (1.0 + abs(a))
    direction = 1.0 if side == "right" else -1.0
    samples = [_analytic(model, point + direction * k * h, 0)[0] for k in range(4)]
    return float(sum(w * s for w, s in zip(_FORWARD[2], samples)) / h ** 2)


def tangent_parabola(
    model: FunctionModel,
    a: float,
    side: Literal["left", "right"],
    points: Optional[int] = None,
    tol: Optional[float] = None,
) -> Parabola:
    """Tight tangent parabola at an interior point, verified on a grid."""
    lo, hi = model.domain
    if not lo < a < hi:
        raise DomainError(f"Tangent point {a} is not interior to [{lo}, {hi}]")
    points = points or settings.tangent_points

    parabola = Parabola(
        center=a,
        value=evaluate(model, a),
        slope=evaluate(model, a, 1),
        curvature=second_derivative_one_sided(model, a, side),
        side=side,
    )

    grid = np.linspace(a, hi, points) if side == "right" else np.linspace(lo, a, points)
    values = evaluate(model, grid)
    tol = settings.verdict_tol_rel * (1.0 + float(np.max(np.abs(values)))) if tol is None else tol
    gap = values - parabola(grid) if side == "right" else parabola(grid) - values
    worst = int(np.argmin(gap))
    if gap[worst] < -tol:
        raise VerificationError(
            f"{side} tangent parabola at {a} crosses the model at x={grid[worst]} by {-gap[worst]:.3e}"
        )
    logger.debug(f"Tangent parabola at {a} ({side}) verified on {points} points")
    return parabola


def bullen_sign_pattern(
    model: FunctionModel,
    a: float,
    alpha: float,
    beta: float,
    gamma: float,
    b: float,
    points: Optional[int] = None,
    tol: Optional[float] = None,
) -> InequalityReport:
    """Check the sign pattern of f - Q for the quadratic Q interpolating f at alpha, beta, gamma."""
    if not a <= alpha <= beta <= gamma <= b:
        raise ParameterError(f"Nodes must satisfy a < alpha < beta < gamma < b, got {(a, alpha, beta, gamma, b)}")
    gap_min = settings.gap_min_rel * (b - a)
    if min(alpha - a, beta - alpha, gamma - beta, b - gamma) < gap_min:
        raise InterpolationError(f"Interpolation nodes {(alpha, beta, gamma)} coincide with each other or the ends")
    points = points or settings.bullen_points

    fa, fb, fc = evaluate(model, np.array([alpha, beta, gamma]))
    d1 = (fb - fa) / (beta - alpha)
    d2 = ((fc - fb) / (gamma - beta) - d1) / (gamma - alpha)
    quadratic = lambda x: fa + (x - alpha) * (d1 + (x - beta) * d2)

    segments = [(a, alpha, 1.0), (alpha, beta, -1.0), (beta, gamma, 1.0), (gamma, b, -1.0)]
    records = []
    scale = 0.0
    worst_margin = np.inf
    worst_x = a
    for lo, hi, sign in segments:
        grid = np.linspace(lo, hi, points)
        values = evaluate(model, grid)
        scale = max(scale, float(np.max(np.abs(values))))
        gap = sign * (quadratic(grid) - values)
        idx = int(np.argmin(gap))
        records.append({"interval": [lo, hi], "sign": "Q-f" if sign > 0 else "f-Q", "margin": float(gap[idx])})
        if gap[idx] < worst_margin:
            worst_margin, worst_x = float(gap[idx]), float(grid[idx])

    tol = settings.verdict_tol_rel * (1.0 + scale) if tol is None else tol
    coefficients = [fa - d1 * alpha + d2 * alpha * beta, d1 - d2 * (alpha + beta), d2]
    report = InequalityReport.from_margin(
        worst_margin,
        tol,
        witness={"x": worst_x, "nodes": [alpha, beta, gamma]},
        cases=["bullen"],
        details={"segments": records, "quadratic": coefficients},
    )
    logger.info(f"Bullen sign pattern on [{a}, {b}]: verdict={report.verdict}, margin={report.margin:.3e}")
    return report


def make_random_3convex(seed: int, knot_count: int, domain: Tuple[float, float] = (0.0, 1.0)) -> FunctionModel:
    """Seeded random building-block model."""
    if knot_count < 0:
        raise ParameterError(f"knot_count must be nonnegative, got {knot_count}")
    lo, hi = domain
    width = hi - lo
    rng = np.random.default_rng(seed)
    quad = rng.uniform(-1.0, 1.0, 3)
    locations = np.sort(rng.uniform(lo + 0.1 * width, hi - 0.1 * width, knot_count))
    weights = rng.exponential(1.0, knot_count)
    return FunctionModel(
        kind="blocks",
        quad=[float(q) for q in quad],
        knots=[Knot(a=float(k), c=float(w)) for k, w in zip(locations, weights)],
        domain=(float(lo), float(hi)),
    )
