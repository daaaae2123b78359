"""
Real symmetric matrices: spectral factorization, matrix functions, the Loewner order and
simultaneous diagonalization of commuting families.

Every factorization goes through the cyclic Jacobi solver below. Matrices are immutable
once built; the factorization is computed eagerly in the constructor.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from config import settings
from divided_differences import shape_warnings
from errors import (
    ConvergenceError,
    DegeneracyError,
    DimensionError,
    DomainError,
    NonCommutingError,
    ParameterError,
)
from function_models import CONCAVE, NONDECREASING, THREE_CONVEX, FunctionModel, evaluate
from hornich_hlawka import hh_abs_check
from schemas import InequalityReport

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
DIAGONAL_TOL = 1e-8


def off_diagonal_norm(a: np.ndarray) -> float:
    """Frobenius norm of the strictly off-diagonal part."""
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


class MatrixSpec(BaseModel):
    """JSON form of a matrix: {"n": 2, "rows": [[1.0, 0.5], [0.5, 2.0]]}."""

    n: int = Field(ge=1)
    rows: List[List[float]]

    @model_validator(mode='after')
    def validate_rows(self):
        if len(self.rows) != self.n or any(len(row) != self.n for row in self.rows):
            raise DimensionError(f"Expected {self.n}x{self.n} rows")
        return self


class SpectralSolver:
    def __init__(self):
        self.tol = settings.jacobi_tol
        self.max_sweeps = settings.jacobi_max_sweeps

    def jacobi_eigh(self, matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenvalues (ascending) and orthonormal eigenvectors by cyclic Jacobi rotations."""
        a = np.array(matrix, dtype=float)
        n = a.shape[0]
        v = np.eye(n)
        threshold = self.tol * np.linalg.norm(a)

        for sweep in range(self.max_sweeps + 1):
            off = off_diagonal_norm(a)
            if off <= threshold:
                break
            if sweep == self.max_sweeps:
                raise ConvergenceError(f"Jacobi rotations did not converge in {self.max_sweeps} sweeps (off-diagonal {off:.3e})")
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                    c = 1.0 / math.hypot(1.0, t)
                    s = t * c

                    col_p, col_q = a[:, p].copy(), a[:, q].copy()
                    a[:, p] = c * col_p - s * col_q
                    a[:, q] = s * col_p + c * col_q
                    row_p, row_q = a[p, :].copy(), a[q, :].copy()
                    a[p, :] = c * row_p - s * row_q
                    a[q, :] = s * row_p + c * row_q
                    a[p, q] = a[q, p] = 0.0

                    vec_p, vec_q = v[:, p].copy(), v[:, q].copy()
                    v[:, p] = c * vec_p - s * vec_q
                    v[:, q] = s * vec_p + c * vec_q

        logger.debug(f"Jacobi converged after {sweep} sweeps for n={n}")
        order = np.argsort(np.diag(a), kind="stable")
        return np.diag(a)[order], v[:, order]


# Global solver instance
spectral_solver = SpectralSolver()


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class SymmetricMatrix:
    def __init__(self, entries: Union[Sequence[Sequence[float]], np.ndarray]):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise DimensionError(f"Expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ParameterError("Matrix entries must be finite")
        a = 0.5 * (a + a.T)
        values, vectors = spectral_solver.jacobi_eigh(a)

        norm = float(np.linalg.norm(a))
        residual = float(np.linalg.norm(vectors @ np.diag(values) @ vectors.T - a))
        drift = float(np.linalg.norm(vectors.T @ vectors - np.eye(len(a))))
        if residual > RESIDUAL_TOL * (1.0 + norm) or drift > RESIDUAL_TOL:
            raise ConvergenceError(f"Factorization residual {residual:.3e}, orthogonality drift {drift:.3e}")

        self._entries = _read_only(a)
        self._values = _read_only(values)
        self._vectors = _read_only(vectors)

    @classmethod
    def from_spec(cls, spec: MatrixSpec) -> "SymmetricMatrix":
        return cls(spec.rows)

    @classmethod
    def from_json(cls, text: str) -> "SymmetricMatrix":
        return cls.from_spec(MatrixSpec.model_validate_json(text))

    @classmethod
    def diagonal(cls, values: Sequence[float]) -> "SymmetricMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    def to_spec(self) -> MatrixSpec:
        return MatrixSpec(n=self.n, rows=self._entries.tolist())

    def to_json(self) -> str:
        return self.to_spec().model_dump_json()

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def eigenvalues(self) -> np.ndarray:
        return self._values

    @property
    def eigenvectors(self) -> np.ndarray:
        return self._vectors

    def __add__(self, other: "SymmetricMatrix") -> "SymmetricMatrix":
        _same_dimension(self, other)
        return SymmetricMatrix(self._entries + other._entries)

    def __sub__(self, other: "SymmetricMatrix") -> "SymmetricMatrix":
        _same_dimension(self, other)
        return SymmetricMatrix(self._entries - other._entries)

    def __repr__(self) -> str:
        return f"SymmetricMatrix(n={self.n}, eigenvalues={self._values.tolist()})"


def _same_dimension(*matrices: SymmetricMatrix) -> None:
    dims = {m.n for m in matrices}
    if len(dims) > 1:
        raise DimensionError(f"Dimension mismatch: {sorted(dims)}")


def spectral_factorize(A: SymmetricMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Orthogonal Q and ascending eigenvalues with A = Q diag(values) Q^T."""
    return A.eigenvectors.copy(), A.eigenvalues.copy()


def apply_spectral(fn: Callable[[np.ndarray], np.ndarray], A: SymmetricMatrix) -> SymmetricMatrix:
    """Q fn(Lambda) Q^T for an elementwise callable."""
    q = A.eigenvectors
    return SymmetricMatrix((q * fn(A.eigenvalues)) @ q.T)


def matrix_function(f: FunctionModel, A: SymmetricMatrix) -> SymmetricMatrix:
    """f(A) through the spectral factorization."""
    values = A.eigenvalues
    lo, hi = f.domain
    slack = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
    if values[0] < lo - slack or values[-1] > hi + slack:
        raise DomainError(f"Eigenvalues [{values[0]}, {values[-1]}] outside the model domain [{lo}, {hi}]")
    return apply_spectral(lambda lam: np.asarray(evaluate(f, np.clip(lam, lo, hi))), A)


def modulus(A: SymmetricMatrix) -> SymmetricMatrix:
    """|A| = (A^2)^(1/2)."""
    return apply_spectral(np.abs, A)


def frobenius_norm(A: SymmetricMatrix) -> float:
    return float(np.linalg.norm(A.entries))


def operator_norm(A: SymmetricMatrix) -> float:
    return float(np.max(np.abs(A.eigenvalues)))


def loewner_leq(A: SymmetricMatrix, B: SymmetricMatrix, tol: Optional[float] = None) -> bool:
    """A <= B in the Loewner order."""
    _same_dimension(A, B)
    tol = settings.loewner_tol if tol is None else tol
    difference = B - A
    return bool(difference.eigenvalues[0] >= -tol * (1.0 + frobenius_norm(difference)))


def commutator_norm(A: SymmetricMatrix, B: SymmetricMatrix) -> float:
    a, b = A.entries, B.entries
    return float(np.linalg.norm(a @ b - b @ a))


def _check_commuting(family: Sequence[SymmetricMatrix], tol: float) -> None:
    for i in range(len(family)):
        for j in range(i + 1, len(family)):
            gap = commutator_norm(family[i], family[j])
            bound = tol * (1.0 + frobenius_norm(family[i])) * (1.0 + frobenius_norm(family[j]))
            if gap > bound:
                raise NonCommutingError(f"Members {i} and {j} do not commute: |AB - BA|_F = {gap:.3e} > {bound:.3e}")


def _diagonalized(rotated: List[np.ndarray], family: Sequence[SymmetricMatrix]) -> bool:
    return all(
        off_diagonal_norm(r) <= DIAGONAL_TOL * (1.0 + frobenius_norm(m))
        for r, m in zip(rotated, family)
    )


def _coupled_blocks(rotated: List[np.ndarray], family: Sequence[SymmetricMatrix]) -> List[List[int]]:
    """Index groups connected by off-diagonal entries above the per-entry bound."""
    n = rotated[0].shape[0]
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for r, m in zip(rotated, family):
        bound = DIAGONAL_TOL * (1.0 + frobenius_norm(m)) / n
        rows, cols = np.nonzero(np.triu(np.abs(r), 1) > bound)
        for i, j in zip(rows, cols):
            parent[find(int(i))] = find(int(j))

    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [group for group in groups.values() if len(group) > 1]


def simultaneous_diagonalize(
    family: Sequence[SymmetricMatrix],
    tol: Optional[float] = None,
    seed: Optional[int] = None,
) -> np.ndarray:
    """One orthogonal Q with Q^T A_i Q diagonal for every member of a commuting family."""
    if not family:
        raise ParameterError("Empty matrix family")
    _same_dimension(*family)
    _check_commuting(family, settings.commute_tol if tol is None else tol)
    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    entries = [m.entries for m in family]

    q = None
    for attempt in range(settings.simdiag_retries):
        weights = rng.standard_normal(len(family))
        q = np.array(SymmetricMatrix(sum(w * a for w, a in zip(weights, entries))).eigenvectors)
        if _diagonalized([q.T @ a @ q for a in entries], family):
            logger.debug(f"Simultaneous diagonalization succeeded on attempt {attempt + 1}")
            return q

    # Clustered spectrum: refine inside each coupled block
    for depth in range(settings.simdiag_max_depth):
        rotated = [q.T @ a @ q for a in entries]
        if _diagonalized(rotated, family):
            logger.debug(f"Block refinement finished at depth {depth}")
            return q
        for block in _coupled_blocks(rotated, family):
            index = np.ix_(block, block)
            weights = rng.standard_normal(len(family))
            inner = SymmetricMatrix(sum(w * r[index] for w, r in zip(weights, rotated))).eigenvectors
            q[:, block] = q[:, block] @ inner

    if _diagonalized([q.T @ a @ q for a in entries], family):
        return q
    raise DegeneracyError(f"Block refinement did not separate the family after {settings.simdiag_max_depth} levels")


def _loewner_gap(f: FunctionModel, A: SymmetricMatrix, B: SymmetricMatrix, C: SymmetricMatrix) -> Tuple[float, float]:
    """Minimum eigenvalue of the left side minus the right side, f(0) I included, and the size of its terms."""
    lhs = [matrix_function(f, modulus(m)) for m in (A, B, C, A + B + C)]
    rhs = [matrix_function(f, modulus(m)) for m in (A + B, B + C, C + A)]
    f0 = float(evaluate(f, 0.0))
    gap = sum(m.entries for m in lhs) - sum(m.entries for m in rhs) - f0 * np.eye(A.n)
    scale = sum(frobenius_norm(m) for m in lhs + rhs) + abs(f0) * math.sqrt(A.n)
    return float(SymmetricMatrix(gap).eigenvalues[0]), scale


def matrix_hh_check(
    f: FunctionModel,
    A: SymmetricMatrix,
    B: SymmetricMatrix,
    C: SymmetricMatrix,
    seed: Optional[int] = None,
) -> InequalityReport:
    """Hornich-Hlawka in the Loewner order for a commuting triple, reduced to eigendirections."""
    _same_dimension(A, B, C)
    q = simultaneous_diagonalize([A, B, C], seed=seed)
    triples = np.stack([np.diag(q.T @ m.entries @ q) for m in (A, B, C)], axis=1)

    scalar = [hh_abs_check(f, *map(float, triple), recheck=False) for triple in triples]
    # Deciding direction: the one with the least slack against its tolerance
    deciding = min(range(len(scalar)), key=lambda i: scalar[i].margin + scalar[i].tol)

    total = float(np.max(np.sum(np.abs(triples), axis=1)))
    warnings = shape_warnings(f, 0.0, total, [NONDECREASING, CONCAVE, THREE_CONVEX]) if total > 0 else []

    loewner_gap, scale = _loewner_gap(f, A, B, C)
    loewner_tol = settings.loewner_tol * (1.0 + scale)
    loewner_holds = loewner_gap >= -loewner_tol
    # A failing scalar direction decides first; otherwise the matrix gap does
    if loewner_holds or not scalar[deciding].verdict:
        margin, tol = scalar[deciding].margin, scalar[deciding].tol
    else:
        margin, tol = loewner_gap, loewner_tol

    report = InequalityReport.from_margin(
        margin,
        tol,
        witness={"direction": deciding, "eigenvalues": triples[deciding].tolist()},
        cases=sorted({s.cases[0] for s in scalar}),
        warnings=warnings,
        details={
            "margins": [s.margin for s in scalar],
            "verdicts": [s.verdict for s in scalar],
            "loewner_gap": loewner_gap,
            "loewner_holds": bool(loewner_holds),
            "n": A.n,
        },
    )
    logger.info(f"Matrix Hornich-Hlawka n={A.n}: verdict={report.verdict}, Loewner gap {loewner_gap:.3e}")
    return report


def exp_semigroup(A: SymmetricMatrix, t: float) -> SymmetricMatrix:
    """e^{-tA} through the spectral factorization."""
    return apply_spectral(lambda lam: np.exp(-t * lam), A)


def exponential_family_check(A: SymmetricMatrix, r: float, s: float, t: float) -> InequalityReport:
    """e^{-|r|A} + e^{-|s|A} + e^{-|t|A} + e^{-|r+s+t|A} <= I + e^{-|r+s|A} + e^{-|s+t|A} + e^{-|t+r|A}."""
    if A.eigenvalues[0] < -RESIDUAL_TOL * (1.0 + frobenius_norm(A)):
        raise ParameterError(f"A must be positive semidefinite, min eigenvalue {A.eigenvalues[0]}")
    total = math.fsum([r, s, t])
    left = sum(exp_semigroup(A, abs(u)).entries for u in (r, s, t, total))
    right = np.eye(A.n) + sum(exp_semigroup(A, abs(u)).entries for u in (r + s, s + t, t + r))
    difference = SymmetricMatrix(right - left)
    tol = settings.verdict_tol_rel * (1.0 + float(np.linalg.norm(right)))
    return InequalityReport.from_margin(
        float(difference.eigenvalues[0]),
        tol,
        lhs=left.tolist(),
        rhs=right.tolist(),
        witness={"r": r, "s": s, "t": t},
        cases=["exponential_family"],
        details={"eigenvalues": A.eigenvalues.tolist()},
    )


def explore_noncommuting(
    f: FunctionModel,
    n: int,
    trials: int,
    seed: Optional[int] = None,
) -> InequalityReport:
    """Random non-commuting triples; an exploration, never a verification."""
    if n < 2 or trials < 1:
        raise ParameterError(f"Need n >= 2 and trials >= 1, got n={n}, trials={trials}")
    seed = settings.default_seed if seed is None else seed
    rng = np.random.default_rng(seed)

    worst, worst_triple = math.inf, None
    for _ in range(trials):
        triple = [SymmetricMatrix(rng.uniform(-1.0, 1.0, (n, n)) / n) for _ in range(3)]
        value, _ = _loewner_gap(f, *triple)
        if value < worst:
            worst, worst_triple = value, triple

    logger.info(f"Non-commuting exploration n={n}, trials={trials}: worst Loewner gap {worst:.3e}")
    return InequalityReport.from_margin(
        worst,
        settings.verdict_tol_rel,
        witness={"matrices": [m.entries.tolist() for m in worst_triple]},
        cases=["exploration"],
        details={"trials": trials, "n": n, "seed": seed, "commuting": False},
    )
