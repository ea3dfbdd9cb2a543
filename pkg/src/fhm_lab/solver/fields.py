"""Piecewise-linear nodal fields on a ring mesh."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd

from fhm_lab.errors import ChecksumError, InputError
from fhm_lab.geometry.mesher import Mesh
from fhm_lab.utils.io import file_checksum
from fhm_lab.utils.logging import get_logger, log_artifact

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class ScalarField:
    mesh: Mesh
    values: np.ndarray
    outer_value: float = 0.0
    inner_value: float = 1.0
    history: pd.DataFrame | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.values.shape != (self.mesh.n_vertices,):
            raise InputError(f"field has {self.values.shape} values for a mesh of {self.mesh.n_vertices} nodes")

    @classmethod
    def from_function(cls, m: Mesh, fn: Callable[[np.ndarray], np.ndarray], **kwargs) -> "ScalarField":
        return cls(mesh=m, values=np.asarray(fn(m.vertices), dtype=float), **kwargs)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return replace(self, values=np.asarray(values, dtype=float))

    @cached_property
    def gradients(self) -> np.ndarray:
        return gradient_field(self)

    @property
    def centroid_values(self) -> np.ndarray:
        return self.values[self.mesh.triangles].mean(axis=1)

    def satisfies_boundary(self, atol: float = 0.0) -> bool:
        v = self.values
        return bool(
            np.all(np.abs(v[self.mesh.outer_nodes] - self.outer_value) <= atol)
            and np.all(np.abs(v[self.mesh.inner_nodes] - self.inner_value) <= atol)
        )


def gradient_field(u: ScalarField) -> np.ndarray:
    """Exact per-triangle gradient of the P1 interpolant, shape (M, 2)."""
    return triangle_gradients(u.mesh, u.values)


def triangle_gradients(m: Mesh, values: np.ndarray) -> np.ndarray:
    return np.einsum("mi,mik->mk", values[m.triangles], m.basis_gradients)


def write_field(u: ScalarField, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"mesh_sha256 {u.mesh.checksum} nodes {u.mesh.n_vertices}\n")
        fh.writelines(f"{v!r}\n" for v in u.values)
    digest = file_checksum(path)
    logger.info("field written", **log_artifact(str(path), digest, rows=u.mesh.n_vertices))
    return digest


def read_field(path: str | Path, m: Mesh) -> ScalarField:
    with open(path) as fh:
        header = fh.readline().split()
        values = np.array([float(line) for line in fh if line.strip()])
    if len(header) < 4 or header[0] != "mesh_sha256":
        raise InputError(f"{path}: missing field header")
    if header[1] != m.checksum:
        raise ChecksumError(f"{path} was computed on mesh {header[1][:16]}..., not {m.checksum[:16]}...")
    return ScalarField(mesh=m, values=values)
