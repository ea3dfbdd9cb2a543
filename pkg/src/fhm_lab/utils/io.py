"""Artifact I/O: checksums and full-precision CSV tables."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import pandas as pd

from fhm_lab.config import get_settings
from fhm_lab.errors import ChecksumError
from fhm_lab.utils.logging import get_logger, log_artifact

logger = get_logger(__name__)


def array_checksum(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(a)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def file_checksum(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def verify_checksum(path: str | Path, expected: str) -> None:
    actual = file_checksum(path)
    if actual != expected:
        raise ChecksumError(f"{path}: expected sha256 {expected[:16]}..., found {actual[:16]}...")


def write_csv(df: pd.DataFrame, path: str | Path) -> str:
    """Write a table with full float precision; returns the file checksum."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=get_settings().float_format)
    digest = file_checksum(path)
    logger.info("csv written", **log_artifact(str(path), digest, rows=len(df)))
    return digest


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def format_float(x: float) -> str:
    return get_settings().float_format % x
