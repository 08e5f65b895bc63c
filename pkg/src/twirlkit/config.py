from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from .errors import InvalidParameterError

load_dotenv()


def _int(name: str, default: int) -> int:
    try:
        return int(os.getenv(name, default))
    except Exception:
        return int(default)


def _str(name: str, default: str = "") -> str:
    return os.getenv(name, default)


@dataclass(frozen=True)
class Settings:
    # Only threads and output_dir may come from the environment; every
    # numerical parameter is an explicit CLI flag.
    threads: int
    output_dir: Path
    log_level: str

    def validate(self) -> None:
        if self.threads < 1:
            raise InvalidParameterError(f"threads must be >= 1, got {self.threads}")

    def resolve_output(self, path: Path | None, default_name: str) -> Path:
        """Explicit paths win; otherwise place the file under output_dir."""
        if path is not None:
            return path
        return self.output_dir / default_name


def get_settings() -> Settings:
    settings = Settings(
        threads=_int("TWIRLKIT_THREADS", os.cpu_count() or 1),
        output_dir=Path(_str("TWIRLKIT_OUTPUT_DIR", "./runs")).expanduser(),
        log_level=_str("TWIRLKIT_LOG_LEVEL", "INFO"),
    )
    settings.validate()
    return settings
