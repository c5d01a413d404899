import os

from pydantic import BaseModel, Field

from config.env_loader import load_env


class Settings(BaseModel):
    """Process-wide settings read from the environment."""
    threads: int = Field(1, ge=1, description="BLAS worker threads (SEMIGRAD_THREADS)")
    log_level: str = Field("INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    log_file: str | None = Field(None, description="Optional log file path")
    default_seed: int = Field(0, ge=0)


def get_settings() -> Settings:
    load_env()
    return Settings(
        threads=os.getenv("SEMIGRAD_THREADS", "1"),
        log_level=os.getenv("SEMIGRAD_LOG_LEVEL", "INFO").upper(),
        log_file=os.getenv("SEMIGRAD_LOG_FILE") or None,
        default_seed=os.getenv("SEMIGRAD_DEFAULT_SEED", "0"),
    )
