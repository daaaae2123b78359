"""
Shared report schema.
All checkers return one of these models so that downstream tooling needs a single parser.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class InequalityReport(BaseModel):
    verdict: bool
    margin: float
    lhs: Optional[Any] = None
    rhs: Optional[Any] = None
    witness: Dict[str, Any] = Field(default_factory=dict)
    cases: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    details: Dict[str, Any] = Field(default_factory=dict)
    tol: float = 0.0

    @model_validator(mode='after')
    def check_verdict(self):
        if self.verdict != (self.margin >= -self.tol):
            raise ValueError(f"verdict {self.verdict} inconsistent with margin {self.margin} and tol {self.tol}")
        return self

    @classmethod
    def from_margin(cls, margin: float, tol: float, **fields: Any) -> "InequalityReport":
        """Build a report whose verdict follows from the margin."""
        return cls(verdict=bool(margin >= -tol), margin=float(margin), tol=float(tol), **fields)


class ConvexityVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: int
    holds: bool
    margin: float
    witness: List[float] = Field(default_factory=list)
    tol: float = 0.0

    @model_validator(mode='after')
    def check_holds(self):
        if self.holds != (self.margin >= -self.tol):
            raise ValueError(f"holds={self.holds} inconsistent with margin {self.margin}")
        return self


class OrderVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    holds: bool
    failing_moment: Optional[int] = None
    min_deficiency: float
    witness_knot: Optional[float] = None
    moment_gaps: List[float] = Field(default_factory=list)
    tol: float = 0.0

    @model_validator(mode='after')
    def check_holds(self):
        expected = self.failing_moment is None and self.min_deficiency >= -self.tol
        if self.holds != expected:
            raise ValueError("holds must equal moments matching and min_deficiency >= -tol")
        return self
