from typing import Optional
from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    PROJECT_NAME: str = "ncdtree"

    # Logging
    LOG_LEVEL: str = "WARNING"

    @field_validator("LOG_LEVEL", mode="before")
    def normalize_log_level(cls, v: str) -> str:
        return str(v).upper()

    # Normal-compressor audit slack: alpha * log2(n) + beta bytes
    NORMALITY_SLACK_ALPHA: float = 10.0
    NORMALITY_SLACK_BETA: float = 64.0

    @field_validator("NORMALITY_SLACK_ALPHA", "NORMALITY_SLACK_BETA")
    def check_slack(cls, v: float) -> float:
        if v < 0:
            raise ValueError("slack parameters must be nonnegative")
        return v

    # Builtin codecs
    LZ_LEVEL: int = 9
    BLOCKSORT_LEVEL: int = 9
    BLOCKSORT_MAX_INPUT: int = 900_000  # one bzip2 block at level 9
    EXTERNAL_TIMEOUT_SECONDS: float = 300.0

    # Code-length cache
    CACHE_BACKEND: str = "memory"
    CACHE_KEY_PREFIX: str = "ncdtree:cl"

    @field_validator("CACHE_BACKEND", mode="before")
    def normalize_cache_backend(cls, v: str) -> str:
        v = str(v).lower()
        if v not in ("memory", "redis"):
            raise ValueError(f"unknown cache backend {v!r}")
        return v

    # Redis
    REDIS_HOST: Optional[str] = None
    REDIS_PORT: str = "6379"
    REDIS_DB: int = 0
    REDIS_PASSWORD: Optional[str] = None

    # Search
    DEFAULT_WORKERS: int = 1
    MAX_STALE: int = 100_000
    S_ONE_EPSILON: float = 1e-12
    BURST_CAP: int = 64
    SUBTREE_SWAP_ATTEMPTS: int = 64
    TRACE_EVERY: int = 0

    @field_validator("DEFAULT_WORKERS", "MAX_STALE", "BURST_CAP", "SUBTREE_SWAP_ATTEMPTS")
    def check_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    # Output
    MATRIX_SIGNIFICANT_DIGITS: int = 15

    class Config:
        case_sensitive = True
        env_file = ".env"
        extra = "ignore"


settings = Settings()
