"""Configuration management"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings"""

    model_config = SettingsConfigDict(
        env_prefix="ILEG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application
    app_name: str = "ileg"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "INFO"

    # Discretization
    grid_steps: int = Field(default=300, ge=2)
    fd_step: float = Field(default=1e-4, gt=0)

    # Outer loop
    max_iterations: int = Field(default=100, ge=1)
    cost_tolerance: float = Field(default=1e-6, gt=0)
    residual_tolerance: float = Field(default=1e-6, gt=0)
    line_search_shrink: float = Field(default=0.5, gt=0, lt=1)
    line_search_min_alpha: float = Field(default=1.0 / 64.0, gt=0, lt=1)

    # Riccati integration
    psd_tolerance: float = Field(default=1e-9, ge=0)
    stiffness_limit: float = Field(default=1.0, gt=0)
    max_substeps: int = Field(default=10000, ge=1)

    # Monte-Carlo evaluation
    rng_seed: int = Field(default=0, ge=0)
    mc_samples: int = Field(default=1000, ge=1)

    # Concurrency
    max_workers: int = Field(default=1, ge=1)


# Create settings instance
settings = Settings()
