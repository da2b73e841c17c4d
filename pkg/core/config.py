"""
Core configuration for the OT capacity bound toolkit
"""
from pathlib import Path
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables (prefix OT_TENSION_)"""

    # Parallelism (0 = one worker per CPU)
    threads: int = Field(default=0, ge=0)

    # Optimizer defaults
    restarts: int = Field(default=32, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    max_iters: int = Field(default=5000, ge=1)
    grid_resolution: int = Field(default=64, ge=2)
    seed: int = Field(default=0, ge=0, lt=2**64)

    # Verification suite sizes
    lemma1_cases: int = Field(default=100, ge=1)
    lemma1_resolution: int = Field(default=64, ge=2)
    oracle_cases: int = Field(default=50, ge=1)
    oracle_resolution: int = Field(default=256, ge=2)
    brute_force_budget: int = Field(default=5_000_000, ge=1)

    # Logging
    log_level: str = Field(default="INFO")
    log_dir: str = Field(default="logs")
    log_file: Optional[str] = Field(default=None)

    # Report rendering
    template_dir: str = Field(default=str(Path(__file__).resolve().parent.parent / "templates"))

    model_config = SettingsConfigDict(
        env_prefix="OT_TENSION_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
