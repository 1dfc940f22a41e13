"""Configuration management."""

import os
from pathlib import Path
from typing import Any

import toml
from pydantic import ValidationError

from ..core.exceptions import ConfigurationError
from ..core.logging import get_logger
from .models import RunConfig

logger = get_logger("config")


def get_runtime_dir(runtime_dir: Path | None = None) -> Path:
    """Resolve the runtime directory, honoring explicit overrides first."""
    if runtime_dir is not None:
        return Path(runtime_dir).expanduser()

    if os.environ.get("GFFT_HOME"):
        return Path(os.environ["GFFT_HOME"]).expanduser()

    if os.name == "nt":
        base = Path(os.environ.get("APPDATA", Path.home() / "AppData" / "Roaming"))
    elif os.environ.get("XDG_CONFIG_HOME"):
        base = Path(os.environ["XDG_CONFIG_HOME"])
    else:
        base = Path.home() / ".config"

    return base / "gfftkit"


def worker_cap() -> int:
    """Worker threads for Monte-Carlo batches (GFFT_THREADS, else CPU count)."""
    raw = os.environ.get("GFFT_THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigurationError(
                f"GFFT_THREADS must be an integer, got {raw!r}",
                details={"GFFT_THREADS": raw},
            ) from e
        if value < 1:
            raise ConfigurationError(
                "GFFT_THREADS must be at least 1", details={"GFFT_THREADS": value}
            )
        return value
    return os.cpu_count() or 1


def _error_fields(error: ValidationError) -> list[str]:
    return [".".join(str(p) for p in e["loc"]) or "<root>" for e in error.errors()]


class ConfigManager:
    """Loads run files and applies command-line overrides."""

    def __init__(self, runtime_dir: Path | None = None):
        self.runtime_dir = get_runtime_dir(runtime_dir)
        if runtime_dir is not None:
            # logs resolve $GFFT_HOME when they write
            os.environ["GFFT_HOME"] = str(self.runtime_dir)

    def load_run(self, path: Path) -> RunConfig:
        """Load and validate a run file."""
        path = Path(path)
        logger.info("Loading run config", path=str(path))
        try:
            with open(path, encoding="utf-8") as f:
                data = toml.load(f)
        except OSError as e:
            raise ConfigurationError(
                f"Cannot read config file {path}: {e}", details={"path": str(path)}
            ) from e
        except toml.TomlDecodeError as e:
            raise ConfigurationError(
                f"Malformed config file {path}: {e}", details={"path": str(path)}
            ) from e
        return self.validate(data, source=str(path))

    def validate(self, data: dict[str, Any], source: str = "<memory>") -> RunConfig:
        try:
            return RunConfig(**data)
        except ValidationError as e:
            fields = _error_fields(e)
            messages = "; ".join(
                f"{field}: {err['msg']}" for field, err in zip(fields, e.errors())
            )
            raise ConfigurationError(
                f"Invalid config {source}: {messages}",
                details={"fields": fields, "source": source},
            ) from e

    def apply_overrides(
        self,
        config: RunConfig,
        samples: int | None = None,
        seed: int | None = None,
        grid_n: int | None = None,
        out: Path | None = None,
    ) -> RunConfig:
        """Return a validated copy with CLI overrides applied."""
        data = config.model_dump(mode="python")
        if samples is not None:
            data["run"]["samples"] = samples
        if seed is not None:
            data["run"]["seed"] = seed
        if grid_n is not None:
            data["space"]["grid_n"] = grid_n
        if out is not None:
            data["run"]["out"] = out
        return self.validate(data, source="overrides")
