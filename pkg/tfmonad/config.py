"""
tfmonad Configuration
Uses Pydantic Settings for environment variable management.
"""
from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Verifier defaults loaded from environment variables."""

    # Sampling
    seed: int = Field(default=42, alias="TFM_SEED")
    samples: int = Field(default=100, alias="TFM_SAMPLES")
    resample_cap_factor: int = Field(default=10, alias="TFM_RESAMPLE_CAP_FACTOR")
    ball_radius_factor: float = Field(default=0.25, alias="TFM_BALL_RADIUS_FACTOR")
    rational_denominator: int = 256

    # Tolerances
    rational_tolerance: float = 0.0
    float_poly_tolerance: float = Field(default=1e-12, alias="TFM_FLOAT_POLY_TOL")
    float_transcendental_tolerance: float = Field(default=1e-9, alias="TFM_FLOAT_TRANS_TOL")
    flow_tolerance: float = Field(default=1e-6, alias="TFM_FLOW_TOL")
    richardson_factor: float = Field(default=10.0, alias="TFM_RICHARDSON_FACTOR")
    rank_threshold: float = Field(default=1e-8, alias="TFM_RANK_THRESHOLD")

    # Integrator
    step_divisor: int = Field(default=1024, alias="TFM_STEP_DIVISOR")
    max_steps: int = Field(default=1000, alias="TFM_MAX_STEPS")

    # Path lifting
    lift_steps: int = Field(default=32, alias="TFM_LIFT_STEPS")
    lift_tolerance: float = Field(default=1e-9, alias="TFM_LIFT_TOL")
    gauss_newton_max_iter: int = 50
    backtrack_factor: float = 0.5
    min_lift_step: float = 1e-6

    # Execution
    max_workers: int = Field(default=1, alias="TFM_MAX_WORKERS")
    output_dir: str = Field(default="reports", alias="TFM_OUTPUT_DIR")

    # Logging
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    class Config:
        env_file = ".env"
        extra = "ignore"

    def tolerance_for(self, backend: str, transcendental: bool = False) -> float:
        """Default residual tolerance for a backend and expression class."""
        if backend == "rational":
            return self.rational_tolerance
        if transcendental:
            return self.float_transcendental_tolerance
        return self.float_poly_tolerance


# Global settings instance
settings = Settings()
