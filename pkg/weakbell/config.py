"""Configuration for weakbell.

Environment variables are read once, after loading the repository-local
`.env` file (if any) so settings are available without manual `source` steps.
"""
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator

try:
    from dotenv import load_dotenv
except ModuleNotFoundError:  # pragma: no cover
    load_dotenv = None  # type: ignore


def init_env(env_path: Optional[Path] = None) -> None:
    """Load variables from `.env` if present.

    Safe to call multiple times; subsequent invocations are no-ops.
    """
    if load_dotenv is None:
        return

    env_path = env_path or Path.cwd() / ".env"
    if env_path.exists() and not os.getenv("_WEAKBELL_ENV_LOADED"):
        load_dotenv(dotenv_path=env_path, override=False)
        os.environ["_WEAKBELL_ENV_LOADED"] = "1"


class Settings(BaseModel):
    """Runtime settings resolved from the environment"""
    workers: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1,
                         description="Thread workers for ensemble execution")
    log_level: str = Field(default="WARNING", description="Logging level name")
    z_reject: float = Field(default=5.0, gt=0, description="Default certificate rejection threshold")

    @field_validator("log_level")
    @classmethod
    def _upper_level(cls, value: str) -> str:
        return value.upper()

    @classmethod
    def from_env(cls) -> "Settings":
        values = {}
        if os.getenv("WEAKBELL_WORKERS"):
            values["workers"] = int(os.environ["WEAKBELL_WORKERS"])
        if os.getenv("WEAKBELL_LOG_LEVEL"):
            values["log_level"] = os.environ["WEAKBELL_LOG_LEVEL"]
        if os.getenv("WEAKBELL_Z_REJECT"):
            values["z_reject"] = float(os.environ["WEAKBELL_Z_REJECT"])
        return cls(**values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Settings for this process"""
    init_env()
    return Settings.from_env()


def reset_settings() -> None:
    """Forget cached settings (tests change the environment)"""
    get_settings.cache_clear()
