"""
The 3-convex stochastic ordering on discrete measures.

nu precedes mu when the integral of every continuous 3-convex function against nu is at
most its integral against mu. The cone of 3-convex functions on [a, b] is generated by
+-1, +-x, +-x^2 and the truncated squares ((x - t)_+)^2, so the order is decided by
matching moments 0..2 and checking g(t) = int ((x - t)_+)^2 d(mu - nu) >= 0 on [a, b].
g is a C^1 piecewise quadratic with knots at the atoms, so its minimum is found exactly.
"""

import logging
import math
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import settings
from errors import MeasureError, ParameterError
from function_models import FunctionModel, evaluate
from parallel import map_batches, spawn_generators
from schemas import OrderVerdict

logger = logging.getLogger(__name__)

ORACLE_BATCH = 1000
ORACLE_MAX_KNOTS = 3


class Atom(BaseModel):
    model_config = ConfigDict(frozen=True)

    x: float
    w: float


class DiscreteMeasure(BaseModel):
    model_config = ConfigDict(frozen=True)

    atoms: List[Atom]
    kind: Literal["probability", "signed"] = "probability"

    @field_validator("atoms")
    @classmethod
    def merge_atoms(cls, atoms: List[Atom]) -> List[Atom]:
        merged: Dict[float, List[float]] = {}
        for atom in atoms:
            merged.setdefault(atom.x, []).append(atom.w)
        combined = [Atom(x=x, w=math.fsum(ws)) for x, ws in merged.items()]
        return sorted((atom for atom in combined if atom.w != 0.0), key=lambda atom: atom.x)

    @model_validator(mode='after')
    def validate_weights(self):
        if not self.atoms:
            raise MeasureError("A measure needs at least one atom with nonzero weight")
        if self.kind == "probability":
            if any(atom.w < 0 for atom in self.atoms):
                raise MeasureError("Probability measure has negative weights")
            total = math.fsum(atom.w for atom in self.atoms)
            if abs(total - 1.0) > settings.probability_tol:
                raise MeasureError(f"Probability weights sum to {total!r}, not 1")
        return self

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[float, float]], kind: str = "probability") -> "DiscreteMeasure":
        return cls(atoms=[Atom(x=float(x), w=float(w)) for x, w in pairs], kind=kind)

    @classmethod
    def dirac(cls, p: float) -> "DiscreteMeasure":
        return cls(atoms=[Atom(x=float(p), w=1.0)])

    @property
    def xs(self) -> np.ndarray:
        return np.array([atom.x for atom in self.atoms])

    @property
    def ws(self) -> np.ndarray:
        return np.array([atom.w for atom in self.atoms])

    @property
    def support(self) -> Tuple[float, float]:
        return self.atoms[0].x, self.atoms[-1].x

    def translate(self, shift: float) -> "DiscreteMeasure":
        return DiscreteMeasure(atoms=[Atom(x=atom.x + shift, w=atom.w) for atom in self.atoms], kind=self.kind)


class OracleResult(BaseModel):
    holds: bool
    failing_moment: Optional[int] = None
    worst_violation: float
    models: int
    seed: int
    witness: Optional[Dict[str, Any]] = None


def moment(mu: DiscreteMeasure, k: int) -> float:
    """k-th raw moment."""
    if k < 0:
        raise ParameterError(f"Moment order must be nonnegative, got {k}")
    return math.fsum(atom.w * atom.x ** k for atom in mu.atoms)


def truncated_square_integral(mu: DiscreteMeasure, t: float) -> float:
    """Integral of ((x - t)_+)^2 against mu."""
    return math.fsum(atom.w * max(atom.x - t, 0.0) ** 2 for atom in mu.atoms)


def integrate(f: FunctionModel, mu: DiscreteMeasure) -> float:
    """Integral of a model against a discrete measure."""
    return math.fsum(mu.ws * np.asarray(evaluate(f, mu.xs)))


def _signed_atoms(nu: DiscreteMeasure, mu: DiscreteMeasure) -> Tuple[np.ndarray, np.ndarray]:
    xs = np.concatenate([mu.xs, nu.xs])
    sigma = np.concatenate([mu.ws, -nu.ws])
    return xs, sigma


def deficiency(nu: DiscreteMeasure, mu: DiscreteMeasure, t: float) -> float:
    """g(t) = int ((x - t)_+)^2 d(mu - nu)."""
    xs, sigma = _signed_atoms(nu, mu)
    return math.fsum(sigma * np.maximum(xs - t, 0.0) ** 2)


def deficiency_pieces(
    nu: DiscreteMeasure,
    mu: DiscreteMeasure,
    a: float,
    b: float,
) -> List[Tuple[float, float, Tuple[float, float, float]]]:
    """Pieces (lo, hi, (A, B, C)) with g(t) = A t^2 + B t + C on [lo, hi]."""
    xs, sigma = _signed_atoms(nu, mu)
    knots = np.unique(np.concatenate([[a, b], xs[(xs > a) & (xs < b)]]))
    pieces = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        active = xs >= hi
        s = sigma[active]
        x = xs[active]
        pieces.append((float(lo), float(hi), (math.fsum(s), -2.0 * math.fsum(s * x), math.fsum(s * x * x))))
    return pieces


def _common_interval(
    nu: DiscreteMeasure,
    mu: DiscreteMeasure,
    interval: Optional[Tuple[float, float]],
) -> Tuple[float, float]:
    lo = min(nu.support[0], mu.support[0])
    hi = max(nu.support[1], mu.support[1])
    if interval is None:
        return lo, hi
    a, b = interval
    if lo < a or hi > b:
        raise MeasureError(f"Supports [{lo}, {hi}] exceed the interval [{a}, {b}]")
    return a, b


def _moment_gaps(nu: DiscreteMeasure, mu: DiscreteMeasure) -> Tuple[List[float], Optional[int]]:
    gaps = []
    failing = None
    for k in range(3):
        target = moment(mu, k)
        gap = target - moment(nu, k)
        gaps.append(gap)
        if failing is None and abs(gap) > settings.moment_tol_rel * (1.0 + abs(target)):
            failing = k
    return gaps, failing


def precedes_3cvx(
    nu: DiscreteMeasure,
    mu: DiscreteMeasure,
    interval: Optional[Tuple[float, float]] = None,
    tol: Optional[float] = None,
) -> OrderVerdict:
    """Decide nu <=_3cvx mu."""
    for measure in (nu, mu):
        if measure.kind != "probability":
            raise MeasureError("The 3-convex order compares probability measures")
    a, b = _common_interval(nu, mu, interval)
    gaps, failing = _moment_gaps(nu, mu)

    best_value = 0.0
    best_t = a
    if b > a:
        best_value = math.inf
        for lo, hi, (A, B, _) in deficiency_pieces(nu, mu, a, b):
            candidates = [lo, hi]
            if A > 0:
                vertex = -B / (2.0 * A)
                if lo < vertex < hi:
                    candidates.append(vertex)
            for t in candidates:
                value = deficiency(nu, mu, t)
                if value < best_value:
                    best_value, best_t = value, t

    if tol is None:
        _, sigma = _signed_atoms(nu, mu)
        tol = settings.verdict_tol_rel * (1.0 + float(np.sum(np.abs(sigma))) * (b - a) ** 2)
    holds = bool(failing is None and best_value >= -tol)
    logger.debug(f"3-convex order on [{a}, {b}]: moments {gaps}, min deficiency {best_value:.3e} at {best_t}")
    return OrderVerdict(
        holds=holds,
        failing_moment=failing,
        min_deficiency=float(best_value),
        witness_knot=float(best_t),
        moment_gaps=gaps,
        tol=tol,
    )


def condensation_dispersion(a: float, b: float) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    """Two-atom measures bounding the uniform mean of 3-convex functions from below and above."""
    if not a < b:
        raise ParameterError(f"Need a < b, got {(a, b)}")
    condensation = DiscreteMeasure.from_pairs([(a, 0.25), ((a + 2.0 * b) / 3.0, 0.75)])
    dispersion = DiscreteMeasure.from_pairs([((2.0 * a + b) / 3.0, 0.75), (b, 0.25)])
    return condensation, dispersion


def _oracle_batch(
    rng: np.random.Generator,
    count: int,
    xs: np.ndarray,
    sigma: np.ndarray,
    a: float,
    b: float,
) -> Tuple[float, Dict[str, Any]]:
    quad = rng.uniform(-1.0, 1.0, (count, 3))
    knot_count = rng.integers(1, ORACLE_MAX_KNOTS + 1, count)
    locations = rng.uniform(a, b, (count, ORACLE_MAX_KNOTS))
    weights = rng.exponential(1.0, (count, ORACLE_MAX_KNOTS)) * (np.arange(ORACLE_MAX_KNOTS) < knot_count[:, None])

    values = quad[:, [0]] + quad[:, [1]] * xs + quad[:, [2]] * xs ** 2
    values = values + np.einsum("mk,mkp->mp", weights, np.maximum(xs[None, None, :] - locations[:, :, None], 0.0) ** 2)
    differences = values @ sigma
    scale = 1.0 + np.max(np.abs(values), axis=1)
    violation = -differences / scale

    i = int(np.argmax(violation))
    witness = {
        "quad": quad[i].tolist(),
        "knots": [[float(loc), float(w)] for loc, w in zip(locations[i], weights[i]) if w > 0],
        "difference": float(differences[i]),
    }
    return float(violation[i]), witness


def monte_carlo_order_oracle(
    nu: DiscreteMeasure,
    mu: DiscreteMeasure,
    models: int = 10_000,
    seed: Optional[int] = None,
    interval: Optional[Tuple[float, float]] = None,
    tol: Optional[float] = None,
) -> OracleResult:
    """Integrate seeded random 3-convex block models against both measures."""
    seed = settings.default_seed if seed is None else seed
    a, b = _common_interval(nu, mu, interval)
    _, failing = _moment_gaps(nu, mu)
    xs, sigma = _signed_atoms(nu, mu)
    tol = settings.verdict_tol_rel if tol is None else tol

    sizes = [min(ORACLE_BATCH, models - start) for start in range(0, models, ORACLE_BATCH)]
    generators = spawn_generators(seed, len(sizes))
    results = map_batches(
        lambda job: _oracle_batch(job[0], job[1], xs, sigma, a, b),
        list(zip(generators, sizes)),
    )
    worst, witness = max(results, key=lambda item: item[0])

    holds = bool(failing is None and worst <= tol)
    return OracleResult(
        holds=holds,
        failing_moment=failing,
        worst_violation=worst,
        models=models,
        seed=seed,
        witness=witness if worst > tol else None,
    )
