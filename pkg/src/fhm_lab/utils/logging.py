"""Logging configuration for the f-harmonic measure laboratory."""

from __future__ import annotations

import logging
import os
import sys
from datetime import datetime
from typing import Any, Dict

import structlog

# Read the level from env or (optionally) settings, but don't fail if missing.
_LEVEL = os.getenv("FHM_LOG_LEVEL", "INFO").upper()
_JSON = False
try:
    from fhm_lab.config import get_settings
    _cfg = get_settings()
    _LEVEL = _cfg.log_level.upper()
    _JSON = _cfg.log_json
except Exception:
    pass

_configured = False


def setup_logging(level: str | None = None, json: bool | None = None) -> None:
    """Configure stdlib logging and structlog once per process."""
    global _configured
    lvl = (level or _LEVEL).upper()
    as_json = _JSON if json is None else json

    root = logging.getLogger("fhm_lab")
    if not root.handlers:
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(h)
    root.setLevel(lvl)

    renderer = (
        structlog.processors.JSONRenderer()
        if as_json
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    if not _configured:
        setup_logging()
    if not name:
        return structlog.get_logger("fhm_lab")
    if not name.startswith("fhm_lab"):
        name = f"fhm_lab.{name}"
    return structlog.get_logger(name)


def log_newton_step(
    stage: int,
    iteration: int,
    epsilon: float,
    energy: float,
    residual: float,
    step: float,
    **kwargs: Any,
) -> Dict[str, Any]:
    """Create a standardized log context for one damped Newton iteration."""
    return {
        "stage": stage,
        "iteration": iteration,
        "epsilon": epsilon,
        "energy": energy,
        "residual": residual,
        "step_length": step,
        **kwargs,
    }


def log_stage(stage: str, elapsed: float, **kwargs: Any) -> Dict[str, Any]:
    """Create a standardized log context for a pipeline stage."""
    return {
        "pipeline_stage": stage,
        "elapsed_ms": round(elapsed * 1000, 2),
        "timestamp": datetime.now().isoformat(),
        **kwargs,
    }


def log_artifact(path: str, checksum: str, rows: int | None = None, **kwargs: Any) -> Dict[str, Any]:
    """Create a standardized log context for an emitted file."""
    ctx: Dict[str, Any] = {"artifact": path, "sha256": checksum[:16]}
    if rows is not None:
        ctx["rows"] = rows
    ctx.update(kwargs)
    return ctx
