"""manifest.json: config copy, version, file checksums and stage timings."""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from fhm_lab.errors import ChecksumError
from fhm_lab.utils.io import file_checksum, verify_checksum

MANIFEST_NAME = "manifest.json"


class RunManifest(BaseModel):
    config: dict[str, Any]
    version: str
    files: dict[str, str] = Field(default_factory=dict)  # name relative to the run dir -> sha256
    stages: dict[str, float] = Field(default_factory=dict)  # stage -> wall-clock seconds
    results: dict[str, Any] = Field(default_factory=dict)
    updated: str = ""

    @classmethod
    def load(cls, run_dir: Path) -> "RunManifest | None":
        path = run_dir / MANIFEST_NAME
        if not path.exists():
            return None
        return cls.model_validate_json(path.read_text())

    def save(self, run_dir: Path) -> Path:
        run_dir.mkdir(parents=True, exist_ok=True)
        self.updated = datetime.now(timezone.utc).isoformat()
        path = run_dir / MANIFEST_NAME
        path.write_text(self.model_dump_json(indent=2) + "\n")
        return path

    def record(self, run_dir: Path, name: str, digest: str | None = None) -> str:
        digest = digest or file_checksum(run_dir / name)
        self.files[name] = digest
        return digest

    def require(self, run_dir: Path, name: str) -> Path:
        """Path of an upstream artifact, refusing missing or modified files."""
        path = run_dir / name
        if name not in self.files or not path.exists():
            raise ChecksumError(f"missing stage input {name} in {run_dir}; run the upstream stage first")
        verify_checksum(path, self.files[name])
        return path
