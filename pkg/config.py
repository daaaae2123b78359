import os
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, model_validator


class Settings(BaseSettings):
    # Tolerance Configuration
    gap_min_rel: float = 1e-9  # relative to the grid span
    verdict_tol_rel: float = 1e-9  # scaled by (1 + max|values|)
    crosscheck_rel: float = 1e-8  # recursive vs product-form divided differences
    moment_tol_rel: float = 1e-9
    probability_tol: float = 1e-12
    loewner_tol: float = 1e-9
    commute_tol: float = 1e-9

    # Quadrature Configuration
    quad_abs_tol: float = 1e-10
    quad_max_depth: int = 40

    # Sampling Configuration
    lattice_points: int = 12  # per axis, positive differences of order 3
    random_points: int = 0
    default_seed: int = 0
    precheck_points: int = 8
    bullen_points: int = 64  # per segment
    tangent_points: int = 100
    shape_grid_points: int = 48

    # Eigensolver Configuration
    jacobi_tol: float = 1e-14  # off-diagonal Frobenius mass, relative
    jacobi_max_sweeps: int = 64
    simdiag_retries: int = 8
    simdiag_max_depth: int = 8

    # Runtime Configuration
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1)
    log_level: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="HICONVEX_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @model_validator(mode='after')
    def validate_limits(self):
        tolerances = {
            "gap_min_rel": self.gap_min_rel,
            "verdict_tol_rel": self.verdict_tol_rel,
            "crosscheck_rel": self.crosscheck_rel,
            "moment_tol_rel": self.moment_tol_rel,
            "probability_tol": self.probability_tol,
            "loewner_tol": self.loewner_tol,
            "commute_tol": self.commute_tol,
            "quad_abs_tol": self.quad_abs_tol,
            "jacobi_tol": self.jacobi_tol,
        }
        for name, value in tolerances.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if min(self.quad_max_depth, self.jacobi_max_sweeps, self.lattice_points, self.precheck_points) < 1:
            raise ValueError("iteration caps and point counts must be at least 1")
        if self.random_points < 0:
            raise ValueError("random_points must be nonnegative")
        if self.simdiag_retries < 1 or self.simdiag_max_depth < 0:
            raise ValueError("simdiag_retries must be at least 1 and simdiag_max_depth nonnegative")
        return self


# Global settings instance
settings = Settings()
