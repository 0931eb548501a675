"""Centralized environment settings for interspace."""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from interspace.core.sampling import DEFAULT_CHUNK_SIZE

DEFAULT_OUTPUT_DIR = Path("interspace-runs")


def _get_template_path() -> Path:
    """Return the path to bundled templates."""
    return Path(__file__).parent.parent / "templates"


def default_config_path(command: str) -> Path:
    """Shipped config for a CLI subcommand."""
    return _get_template_path() / "configs" / f"{command}.yaml"


class SamplingSettings(BaseModel):
    """Defaults for the replicate engine."""

    workers: int = Field(default=1, ge=1, description="Threads used for replicate chunks")
    chunk_size: int = Field(
        default=DEFAULT_CHUNK_SIZE,
        ge=1,
        description="Replicates per chunk; part of the reproducibility contract",
    )


class InterspaceSettings(BaseSettings):
    """Application-wide settings loaded from env, .env, and defaults."""

    output_dir: Path = Field(default=DEFAULT_OUTPUT_DIR, description="Where runs write artifacts")
    log_level: str = Field(default="INFO", description="Log verbosity")
    sampling: SamplingSettings = Field(default_factory=SamplingSettings)

    model_config = SettingsConfigDict(
        env_prefix="INTERSPACE_",
        env_file=".env",
        extra="ignore",
        env_nested_delimiter="__",
    )

    def prepare_environment(self) -> None:
        """Resolve overrides and make sure the output directory exists."""

        output_override = os.getenv("INTERSPACE_OUTPUT_DIR")
        if output_override:
            self.output_dir = Path(output_override)
        self.output_dir = self.output_dir.expanduser()
        (self.output_dir / "logs").mkdir(parents=True, exist_ok=True)


@lru_cache(maxsize=1)
def get_settings() -> InterspaceSettings:
    """Return a cached settings instance."""

    settings = InterspaceSettings()
    settings.prepare_environment()
    return settings
