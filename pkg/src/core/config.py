"""Application configuration settings."""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="SPARSEVAR_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "SparseVAR Missing"
    VERSION: str = "0.1.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(message)s"

    # Execution
    THREADS: int = 1
    OUTPUT_DIR: str = "results"
    DEFAULT_SEED: int = 0

    # Spectral diagnostics
    SPECTRAL_GRID_POINTS: int = 512
    SPECTRAL_REFINE_TOL: float = 1e-8
    DIAGONALIZABLE_COND_LIMIT: float = 1e8
    PSI_SIZE_LIMIT: int = 4000

    # Solver
    SOLVER_MAX_ITERS: int = 5000
    SOLVER_TOL: float = 1e-9

    # Universal constants of the error bounds
    UNIVERSAL_C0: float = 1.0
    UNIVERSAL_C1: float = 1.0
    UNIVERSAL_CA: float = 1.0

    # Monte Carlo harnesses
    MC_MIN_TRIALS: int = 100


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
