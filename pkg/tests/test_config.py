import pytest
from pydantic import ValidationError

from config import Settings


class TestSettings:
    def test_defaults(self):
        settings = Settings(_env_file=None)
        assert settings.verdict_tol_rel == 1e-9
        assert settings.quad_max_depth == 40
        assert settings.threads >= 1
        assert settings.default_seed == 0

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("HICONVEX_THREADS", "3")
        monkeypatch.setenv("HICONVEX_LATTICE_POINTS", "5")
        settings = Settings(_env_file=None)
        assert settings.threads == 3
        assert settings.lattice_points == 5

    @pytest.mark.parametrize("field, value", [
        ("verdict_tol_rel", 0.0),
        ("threads", 0),
        ("quad_max_depth", 0),
        ("random_points", -1),
        ("simdiag_retries", 0),
    ])
    def test_invalid_values_rejected(self, field, value):
        with pytest.raises(ValidationError):
            Settings(_env_file=None, **{field: value})
