from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Application Configuration
    APP_NAME: str = "qdiscrim"
    APP_VERSION: str = "1.0.0"
    LOG_LEVEL: str = "INFO"

    # Reproducibility
    SEED: int = 42

    # Optimizer Configuration
    RESTARTS: int = 32
    MAX_ITERS: int = 2000
    CONVERGENCE_TOL: float = 1e-12

    # Monte Carlo Configuration
    TRIALS: int = 1_000_000
    MC_PARTITION_SIZE: int = 100_000

    # Sweep grid over the channel parameter, 99 points on (0, 1)
    GRID_START: float = 0.01
    GRID_STOP: float = 0.99
    GRID_STEPS: int = 99

    # Worker pool size; -1 uses every core
    WORKERS: int = -1

    # Numerics
    EIG_METHOD: str = "jacobi"  # jacobi | lapack
    STATE_TOL: float = 1e-9

    # Information-theory search
    POVM_RESTARTS: int = 4
    PRIOR_GRID: int = 4

    class Config:
        env_prefix = "QDISCRIM_"
        env_file = ".env"
        case_sensitive = True


# Create settings instance
settings = Settings()
