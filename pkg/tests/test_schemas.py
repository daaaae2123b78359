"""
Tests for the shared report models.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from schemas import ConvexityVerdict, InequalityReport, OrderVerdict


class TestInequalityReport:
    def test_numpy_margin_gives_plain_bool(self):
        report = InequalityReport.from_margin(np.float64(-1e-14), np.float64(1e-12))
        assert report.verdict is True
        assert type(report.margin) is float
        assert type(report.tol) is float

    def test_failing_margin(self):
        report = InequalityReport.from_margin(np.float64(-0.5), 1e-12, cases=["demo"])
        assert report.verdict is False
        assert report.cases == ["demo"]

    def test_inconsistent_verdict_rejected(self):
        with pytest.raises(ValidationError):
            InequalityReport(verdict=True, margin=-1.0, tol=0.0)


class TestVerdictModels:
    def test_convexity_verdict_consistency(self):
        with pytest.raises(ValidationError):
            ConvexityVerdict(order=3, holds=True, margin=-1.0)

    def test_order_verdict_requires_matching_moments(self):
        with pytest.raises(ValidationError):
            OrderVerdict(holds=True, failing_moment=2, min_deficiency=0.0)
