"""
Adaptive quadrature.
Interval bisection driven by the embedded 7-point Gauss / 15-point Kronrod pair.
"""

import logging
import math
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from config import settings
from errors import QuadratureError

logger = logging.getLogger(__name__)

# Kronrod abscissae on [-1, 1], nonnegative half
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights for abscissae _XGK[1], _XGK[3], _XGK[5], _XGK[7]
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[[13, 11, 9]] = _WG[:3]

Integrand = Callable[[np.ndarray], np.ndarray]


class AdaptiveQuadrature:
    def __init__(self):
        """Initialize the integrator from settings."""
        self.abs_tol = settings.quad_abs_tol
        self.max_depth = settings.quad_max_depth

    def _rule(self, fn: Integrand, a: float, b: float) -> Tuple[float, float]:
        """Kronrod estimate and embedded error on [a, b]."""
        center = 0.5 * (a + b)
        half = 0.5 * (b - a)
        values = np.asarray(fn(center + half * _NODES), dtype=float)
        kronrod = half * float(np.dot(_KRONROD, values))
        gauss = half * float(np.dot(_GAUSS, values))
        return kronrod, abs(kronrod - gauss)

    def integrate(
        self,
        fn: Integrand,
        a: float,
        b: float,
        breakpoints: Iterable[float] = (),
        tol: Optional[float] = None,
        max_depth: Optional[int] = None,
    ) -> float:
        """Integrate a vectorized function over [a, b]."""
        if a == b:
            return 0.0
        if a > b:
            return -self.integrate(fn, b, a, breakpoints, tol, max_depth)

        tol = self.abs_tol if tol is None else tol
        max_depth = self.max_depth if max_depth is None else max_depth
        total = b - a

        cuts = sorted({float(p) for p in breakpoints if a < p < b})
        edges = [a] + cuts + [b]
        stack: List[Tuple[float, float, int]] = [(lo, hi, 0) for lo, hi in zip(edges[:-1], edges[1:])]

        accepted: List[float] = []
        intervals = 0
        while stack:
            lo, hi, depth = stack.pop()
            value, error = self._rule(fn, lo, hi)
            if not math.isfinite(value):
                raise QuadratureError(f"Non-finite integrand on [{lo}, {hi}]")
            local_tol = max(tol * (hi - lo) / total, 50.0 * np.finfo(float).eps * abs(value))
            if error <= local_tol:
                accepted.append(value)
                intervals += 1
                continue
            if depth >= max_depth:
                raise QuadratureError(
                    f"Quadrature did not converge on [{lo}, {hi}] after {max_depth} bisections (error {error:.3e})"
                )
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))

        logger.debug(f"Integrated over [{a}, {b}] with {intervals} intervals")
        return math.fsum(accepted)


# Global quadrature instance
quadrature = AdaptiveQuadrature()
