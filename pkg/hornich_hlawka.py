"""
Hornich-Hlawka inequalities for 3-convex functions.

Triples are canonicalized by a global sign flip (so that at most one entry is negative)
and a descending sort x >= y >= z. Case1 has all entries of one sign; Case2 splits on the
size of |z| against y, x and x + y. Boundary triples take the latest matching label.
"""

import functools
import itertools
import logging
import math
import operator
from typing import Any, Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import settings
from divided_differences import default_tol, shape_warnings
from errors import DomainError, ParameterError
from function_models import CONCAVE, CONVEX, NONDECREASING, THREE_CONVEX, FunctionModel, evaluate
from parallel import map_batches, spawn_generators
from schemas import InequalityReport

logger = logging.getLogger(__name__)

CaseName = Literal["Case1", "Case2a", "Case2b", "Case2c", "Case2d"]
SpecialForm = Literal["RHH", "MHH", "HHalpha"]

# Which argument settles each case
COVERING_ARGUMENT = {
    "Case1": "positive_third_differences",
    "Case2a": "two_nonnegative_majorization",
    "Case2b": "concave_majorization",
    "Case2c": "concave_majorization",
    "Case2d": "concave_majorization",
}

_ABS_SHAPES = [NONDECREASING, CONCAVE, THREE_CONVEX]
FREUDENTHAL_BATCH = 10_000


class CaseLabel(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: CaseName
    permutation: Tuple[int, int, int]
    flipped: bool
    canonical: Tuple[float, float, float]

    @property
    def argument(self) -> str:
        return COVERING_ARGUMENT[self.label]


class FreudenthalResult(BaseModel):
    positive: Optional[List[float]] = None
    positive_value: Optional[float] = None
    negative: Optional[List[float]] = None
    negative_value: Optional[float] = None
    evaluated: int
    seed: int


def classify_triple(x: float, y: float, z: float) -> CaseLabel:
    """Canonicalize a triple and assign its case."""
    values = (x, y, z)
    nonnegative = sum(v >= 0 for v in values)
    nonpositive = sum(v <= 0 for v in values)
    if nonnegative == 3:
        flipped = False
    elif nonpositive == 3:
        flipped = True
    else:
        flipped = nonnegative < 2
    sign = -1.0 if flipped else 1.0
    signed = [sign * v for v in values]
    permutation = tuple(sorted(range(3), key=lambda i: -signed[i]))
    cx, cy, cz = (signed[i] for i in permutation)

    if cz >= 0:
        label = "Case1"
    elif -cz <= cy:
        label = "Case2d"
    elif -cz <= cx:
        label = "Case2c"
    elif -cz <= cx + cy:
        label = "Case2b"
    else:
        label = "Case2a"
    return CaseLabel(label=label, permutation=permutation, flipped=flipped, canonical=(cx, cy, cz))


def _covering_interval(f: FunctionModel, A: float) -> None:
    lo, hi = f.domain
    if lo > 0 or hi < A:
        raise DomainError(f"Model domain [{lo}, {hi}] does not cover [0, {A}]")


def _hh_terms(f: FunctionModel, x: float, y: float, z: float, use_abs: bool) -> Tuple[np.ndarray, np.ndarray]:
    total = math.fsum([x, y, z])
    left = np.array([x, y, z, total])
    right = np.array([x + y, y + z, z + x, 0.0])
    if use_abs:
        left, right = np.abs(left), np.abs(right)
    return np.asarray(evaluate(f, left)), np.asarray(evaluate(f, right))


def hh_basic_check(
    f: FunctionModel,
    x: float,
    y: float,
    z: float,
    A: Optional[float] = None,
    form: Literal["HH1", "HH2"] = "HH1",
) -> InequalityReport:
    """f(x)+f(y)+f(z)+f(x+y+z) >= f(x+y)+f(y+z)+f(z+x)+f(0) on nonnegative triples."""
    if min(x, y, z) < 0:
        raise DomainError(f"hh_basic_check needs nonnegative inputs, got {(x, y, z)}")
    total = math.fsum([x, y, z])
    A = total if A is None else A
    if total > A:
        raise DomainError(f"x + y + z = {total} exceeds A = {A}")
    _covering_interval(f, A)

    left, right = _hh_terms(f, x, y, z, use_abs=False)
    f0 = float(right[3])
    margins = {"HH1": math.fsum(np.concatenate([left, -right]))}
    if f0 >= 0:
        margins["HH2"] = math.fsum(np.concatenate([left, -right[:3]]))
    if form not in margins:
        raise ParameterError(f"{form} requires f(0) >= 0, got f(0) = {f0}")

    lhs = math.fsum(left)
    rhs = math.fsum(right) if form == "HH1" else math.fsum(right[:3])
    return InequalityReport.from_margin(
        margins[form],
        default_tol(np.concatenate([left, right])),
        lhs=lhs,
        rhs=rhs,
        witness={"x": x, "y": y, "z": z},
        cases=list(margins),
        details={"margins": margins, "form": form, "A": A},
    )


def hh_abs_check(
    f: FunctionModel,
    x: float,
    y: float,
    z: float,
    A: Optional[float] = None,
    recheck: bool = True,
) -> InequalityReport:
    """Absolute-value form for nondecreasing, concave, 3-convex f on [0, A]."""
    total = math.fsum([abs(x), abs(y), abs(z)])
    A = total if A is None else A
    if total > A:
        raise DomainError(f"|x| + |y| + |z| = {total} exceeds A = {A}")
    _covering_interval(f, A)
    warnings = shape_warnings(f, 0.0, A, _ABS_SHAPES) if recheck and A > 0 else []

    case = classify_triple(x, y, z)
    left, right = _hh_terms(f, x, y, z, use_abs=True)
    return InequalityReport.from_margin(
        math.fsum(np.concatenate([left, -right])),
        default_tol(np.concatenate([left, right])),
        lhs=math.fsum(left),
        rhs=math.fsum(right),
        witness={"x": x, "y": y, "z": z},
        cases=[case.label, case.argument],
        warnings=warnings,
        details={"case": case.model_dump(), "A": A},
    )


def special_form_check(form: SpecialForm, alpha: Optional[float], x: float, y: float, z: float) -> InequalityReport:
    """Rational, multiplicative and fractional-power forms."""
    if form in ("RHH", "HHalpha") and (alpha is None or not 0 < alpha <= 1):
        raise ParameterError(f"{form} needs alpha in (0, 1], got {alpha}")
    total = math.fsum([x, y, z])
    left = np.abs(np.array([x, y, z, total]))
    right = np.abs(np.array([x + y, y + z, z + x]))

    if form == "MHH":
        lhs = float(np.prod(1.0 + left))
        rhs = float(np.prod(1.0 + right))
    else:
        transform = (lambda t: t ** alpha / (1.0 + t ** alpha)) if form == "RHH" else (lambda t: t ** alpha)
        lhs = math.fsum(transform(left))
        rhs = math.fsum(transform(right))

    case = classify_triple(x, y, z)
    return InequalityReport.from_margin(
        lhs - rhs,
        default_tol([lhs, rhs]),
        lhs=lhs,
        rhs=rhs,
        witness={"x": x, "y": y, "z": z, "alpha": alpha},
        cases=[form, case.label],
    )


def va_generalized_check(
    f: FunctionModel,
    xs: Sequence[float],
    k: int,
    A: Optional[float] = None,
    recheck: bool = True,
) -> InequalityReport:
    """n-variable generalization over all k-subsets."""
    n = len(xs)
    if not 2 <= k < n:
        raise ParameterError(f"Need 2 <= k < n, got k={k}, n={n}")
    xs = [float(v) for v in xs]
    total_abs = math.fsum(abs(v) for v in xs)
    A = total_abs if A is None else A
    if total_abs > A:
        raise DomainError(f"sum |x_i| = {total_abs} exceeds A = {A}")
    _covering_interval(f, A)
    warnings = shape_warnings(f, 0.0, A, _ABS_SHAPES) if recheck and A > 0 else []

    subset_sums = np.array([abs(math.fsum(xs[i] for i in subset)) for subset in itertools.combinations(range(n), k)])
    singles = np.asarray(evaluate(f, np.abs(np.array(xs))))
    whole, zero = evaluate(f, np.array([abs(math.fsum(xs)), 0.0]))
    subsets = np.asarray(evaluate(f, subset_sums))

    lhs = math.comb(n - 2, k - 1) * math.fsum(singles) + math.comb(n - 2, k - 2) * whole
    rhs = math.fsum(subsets) + math.comb(n - 1, k) * zero
    return InequalityReport.from_margin(
        lhs - rhs,
        default_tol([lhs, rhs]),
        lhs=lhs,
        rhs=rhs,
        witness={"xs": xs, "k": k},
        cases=[f"n={n}", f"k={k}"],
        warnings=warnings,
        details={"subsets": len(subset_sums), "A": A},
    )


def semigroup_hh_check(
    phi: Callable[[Any], float],
    xs: Sequence[Any],
    k: int = 2,
    add: Callable[[Any, Any], Any] = operator.add,
) -> InequalityReport:
    """
    k-subset form for phi on a commutative semigroup with operation add.
    With three elements and k = 2 this is
    phi(x) + phi(y) + phi(z) + phi(x+y+z) >= phi(x+y) + phi(y+z) + phi(z+x),
    which holds e.g. for the Euclidean norm on vectors or len on sets under union.
    """
    n = len(xs)
    if not 2 <= k < n:
        raise ParameterError(f"Need 2 <= k < n, got k={k}, n={n}")
    combine = lambda items: functools.reduce(add, items)

    singles = [float(phi(x)) for x in xs]
    whole = float(phi(combine(xs)))
    subsets = [float(phi(combine([xs[i] for i in subset]))) for subset in itertools.combinations(range(n), k)]

    lhs = math.comb(n - 2, k - 1) * math.fsum(singles) + math.comb(n - 2, k - 2) * whole
    rhs = math.fsum(subsets)
    report = InequalityReport.from_margin(
        lhs - rhs,
        default_tol(singles + subsets + [whole]),
        lhs=lhs,
        rhs=rhs,
        witness={"k": k, "singles": singles, "whole": whole},
        cases=["semigroup", f"n={n}", f"k={k}"],
        details={"subsets": len(subsets)},
    )
    logger.debug(f"Semigroup HH n={n}, k={k}: margin={report.margin:.3e}")
    return report


def freudenthal_value(xs: Sequence[float]) -> float:
    """Alternating sum of |partial sums| over all nonempty subsets of four reals."""
    if len(xs) != 4:
        raise ParameterError(f"Freudenthal function takes four arguments, got {len(xs)}")
    terms = []
    for size in range(1, 5):
        sign = (-1.0) ** (size + 1)
        terms += [sign * abs(math.fsum(xs[i] for i in subset)) for subset in itertools.combinations(range(4), size)]
    return math.fsum(terms)


def _freudenthal_batch(points: np.ndarray) -> np.ndarray:
    result = np.zeros(len(points))
    for size in range(1, 5):
        sign = (-1.0) ** (size + 1)
        for subset in itertools.combinations(range(4), size):
            result += sign * np.abs(points[:, list(subset)].sum(axis=1))
    return result


def freudenthal_search(seed: Optional[int] = None, trials: int = 10_000) -> FreudenthalResult:
    """Search for inputs where the Freudenthal function is positive and negative."""
    if trials < 1:
        raise ParameterError(f"trials must be at least 1, got {trials}")
    seed = settings.default_seed if seed is None else seed

    lattice = np.array(list(itertools.product(range(-4, 5), repeat=4)), dtype=float)
    sizes = [min(FREUDENTHAL_BATCH, trials - start) for start in range(0, trials, FREUDENTHAL_BATCH)]
    randoms = [rng.uniform(-1.0, 1.0, (size, 4)) for rng, size in zip(spawn_generators(seed, len(sizes)), sizes)]
    points = np.vstack([lattice] + randoms)
    values = np.concatenate(map_batches(_freudenthal_batch, [lattice] + randoms))

    result = {"evaluated": len(points), "seed": seed}
    top = int(np.argmax(values))
    bottom = int(np.argmin(values))
    for index, key in ((top, "positive"), (bottom, "negative")):
        candidate = points[index].tolist()
        exact = freudenthal_value(candidate)
        if (exact > 0) if key == "positive" else (exact < 0):
            result[key] = candidate
            result[f"{key}_value"] = exact
    logger.info(f"Freudenthal search over {len(points)} points: positive={result.get('positive')}, negative={result.get('negative')}")
    return FreudenthalResult(**result)


def majorization_check(g: FunctionModel, a: float, b: float, c: float, d: float) -> InequalityReport:
    """g(c) + g(d) <= g(a) + g(b) for convex g when a + b = c + d and c, d lie between a and b."""
    lo, hi = min(a, b), max(a, b)
    if abs((a + b) - (c + d)) > 1e-12 * (1.0 + abs(a) + abs(b)):
        raise ParameterError(f"a + b = {a + b} differs from c + d = {c + d}")
    if not (lo <= c <= hi and lo <= d <= hi):
        raise ParameterError(f"c, d = {(c, d)} must lie in [{lo}, {hi}]")
    warnings = shape_warnings(g, lo, hi, [CONVEX]) if hi > lo else []
    ga, gb, gc, gd = evaluate(g, np.array([a, b, c, d]))
    return InequalityReport.from_margin(
        math.fsum([ga, gb, -gc, -gd]),
        default_tol([ga, gb, gc, gd]),
        lhs=gc + gd,
        rhs=ga + gb,
        witness={"a": a, "b": b, "c": c, "d": d},
        cases=["majorization"],
        warnings=warnings,
    )
