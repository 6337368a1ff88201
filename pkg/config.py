"""
Configuration settings for swarmcheck
"""

import os
from typing import Optional
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


def _env_float(name: str, default: float) -> float:
    value = os.getenv(name)
    return float(value) if value not in (None, "") else default


class Config:
    """Application configuration"""

    # Search budgets
    BUDGET_STATES: int = _env_int("BUDGET_STATES", 20_000_000)
    BUDGET_SECONDS: float = _env_float("BUDGET_SECONDS", 0.0)  # 0 disables the clock

    # Frontier expansion
    WORKERS: int = _env_int("WORKERS", 1)  # 1 = expand in-process
    FRONTIER_CHUNK: int = _env_int("FRONTIER_CHUNK", 4096)

    # Model defaults
    DEFAULT_ALPHA: int = _env_int("DEFAULT_ALPHA", 1)
    DEFAULT_RANGE: int = _env_int("DEFAULT_RANGE", 1)
    DEFAULT_METRIC: str = os.getenv("DEFAULT_METRIC", "chebyshev")

    # Output settings
    GOLDEN_DIR: Optional[str] = os.getenv("GOLDEN_DIR")
    SMV_DIALECT_HEADER: str = "-- swarmcheck generated model (NuSMV input language)"

    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    @classmethod
    def validate(cls) -> list:
        """Validate configuration and return list of warnings"""
        warnings = []

        if cls.BUDGET_STATES <= 0:
            warnings.append("BUDGET_STATES <= 0 - every search will stop immediately as inconclusive")

        if cls.BUDGET_SECONDS < 0:
            warnings.append("BUDGET_SECONDS is negative - wall-clock budget disabled")

        cpus = os.cpu_count() or 1
        if cls.WORKERS > cpus:
            warnings.append(f"WORKERS={cls.WORKERS} exceeds the {cpus} available CPUs")

        if cls.DEFAULT_METRIC not in ("chebyshev", "manhattan", "euclidean"):
            warnings.append(f"DEFAULT_METRIC '{cls.DEFAULT_METRIC}' unknown - runs without --metric will be rejected")

        return warnings

# Global config instance
config = Config()
