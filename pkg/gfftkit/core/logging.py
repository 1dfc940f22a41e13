"""JSON-lines logging for runs and verifiers.

Each module gets one ``StructuredLogger``. Records go to
``<log_dir>/<name>.jsonl`` (rotated at 10 MiB, 7 backups); errors are also
printed to stderr. The log directory is resolved at write time, so
``GFFT_HOME`` changes take effect without rebuilding loggers.
"""

import json
import logging
import logging.handlers
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

MAX_BYTES = 10 * 1024 * 1024
BACKUPS = 7

# fields merged into every record, e.g. config path and seed of the current run
_run_context: dict[str, Any] = {}
_unwritable_dirs: set[Path] = set()


def set_run_context(**fields: Any) -> None:
    """Replace the fields attached to every subsequent record."""
    _run_context.clear()
    _run_context.update({k: v for k, v in fields.items() if v is not None})


def default_log_dir() -> Path:
    if os.environ.get("GFFT_HOME"):
        return Path(os.environ["GFFT_HOME"]).expanduser() / "logs"
    return Path.home() / ".local" / "share" / "gfftkit" / "logs"


def _jsonable(value: Any) -> Any:
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


class JSONLinesFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        data: dict[str, Any] = {
            "ts": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "msg": record.getMessage(),
            "func": record.funcName,
            "line": record.lineno,
        }
        data.update(getattr(record, "run", {}))
        data.update(getattr(record, "fields", {}))
        if record.exc_info:
            data["exc"] = self.formatException(record.exc_info)
        return json.dumps({k: _jsonable(v) for k, v in data.items()}, default=str)


class StructuredLogger:
    """Keyword-field logger over a stdlib logger named ``gfftkit.<name>``."""

    def __init__(self, name: str, log_dir: Path | None = None):
        self.name = name
        self.log_dir = log_dir
        self.logger = logging.getLogger(f"gfftkit.{name}")
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False
        self.logger.handlers.clear()
        self._file_handler: logging.FileHandler | None = None

        stderr = logging.StreamHandler(sys.stderr)
        stderr.setLevel(logging.ERROR)
        stderr.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        self.logger.addHandler(stderr)

    def _attach_file(self) -> None:
        target = Path(self.log_dir) if self.log_dir is not None else default_log_dir()
        path = target / f"{self.name}.jsonl"
        if self._file_handler is not None:
            if Path(self._file_handler.baseFilename) == path.absolute():
                return
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()
            self._file_handler = None
        if target in _unwritable_dirs:
            return
        try:
            target.mkdir(parents=True, exist_ok=True)
            handler = logging.handlers.RotatingFileHandler(
                path, maxBytes=MAX_BYTES, backupCount=BACKUPS, encoding="utf-8"
            )
        except OSError:
            _unwritable_dirs.add(target)
            print(
                f"Warning: log directory {target} is not writable; "
                "logging errors to stderr only.",
                file=sys.stderr,
            )
            return
        handler.setFormatter(JSONLinesFormatter())
        self._file_handler = handler
        self.logger.addHandler(handler)

    def _log(
        self, level: int, msg: str, exc_info: bool, fields: dict[str, Any]
    ) -> None:
        self._attach_file()
        self.logger.log(
            level,
            msg,
            exc_info=exc_info,
            extra={"fields": fields, "run": dict(_run_context)},
            stacklevel=3,
        )

    def debug(self, msg: str, **fields: Any) -> None:
        self._log(logging.DEBUG, msg, False, fields)

    def info(self, msg: str, **fields: Any) -> None:
        self._log(logging.INFO, msg, False, fields)

    def warning(self, msg: str, **fields: Any) -> None:
        self._log(logging.WARNING, msg, False, fields)

    def error(self, msg: str, exc_info: bool = False, **fields: Any) -> None:
        self._log(logging.ERROR, msg, exc_info, fields)


_loggers: dict[str, StructuredLogger] = {}


def get_logger(name: str, log_dir: Path | None = None) -> StructuredLogger:
    """Shared logger for a module; ``log_dir`` pins its directory."""
    if name not in _loggers:
        _loggers[name] = StructuredLogger(name, log_dir)
    elif log_dir is not None:
        _loggers[name].log_dir = log_dir
    return _loggers[name]
