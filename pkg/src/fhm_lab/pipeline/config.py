"""One TOML file per experiment, validated into a RunConfig."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from fhm_lab.errors import ConfigError
from fhm_lab.geometry.domains import KOCH_MAX_LEVEL
from fhm_lab.solver.newton import SolveOptions


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class IntegrandConfig(_Block):
    kind: Literal["power", "quadratic-form", "sampled-profile"] = "power"
    p: float = Field(2.0, gt=1.0)
    matrix: list[list[float]] | None = None
    profile_file: Path | None = None
    delta: float | None = Field(None, gt=0.0, le=1.0)
    n_samples: int = Field(10_000, ge=1000)

    @model_validator(mode="after")
    def _parameters_for_kind(self) -> "IntegrandConfig":
        if not np.isfinite(self.p):
            raise ValueError("p must be finite")
        if self.kind == "quadratic-form":
            if self.matrix is None:
                raise ValueError("quadratic-form needs matrix = [[a, b], [b, d]]")
            A = np.asarray(self.matrix, dtype=float)
            if A.shape != (2, 2) or not np.allclose(A, A.T) or np.any(np.linalg.eigvalsh(A) <= 0):
                raise ValueError("matrix must be symmetric positive definite 2x2")
        if self.kind == "sampled-profile":
            if self.profile_file is None:
                raise ValueError("sampled-profile needs profile_file")
            if not self.profile_file.exists():
                raise ValueError(f"profile_file {self.profile_file} does not exist")
        return self


class DomainConfig(_Block):
    kind: Literal["disk", "square", "koch", "custom"] = "disk"
    radius: float = Field(5.0, gt=1.0)
    half_side: float = Field(4.0, gt=0.0)
    level: int = Field(3, ge=0, le=KOCH_MAX_LEVEL)
    size: float = Field(1.0, gt=0.0)
    vertices: list[tuple[float, float]] | None = None
    z0: tuple[float, float] = (0.0, 0.0)

    @model_validator(mode="after")
    def _custom_vertices(self) -> "DomainConfig":
        if self.kind == "custom" and (self.vertices is None or len(self.vertices) < 3):
            raise ValueError("custom domain needs at least three vertices")
        return self

    def params(self) -> dict[str, Any]:
        if self.kind == "disk":
            return {"radius": self.radius}
        if self.kind == "square":
            return {"half_side": self.half_side, "z0": self.z0}
        if self.kind == "koch":
            return {"level": self.level, "size": self.size, "z0": self.z0}
        return {"vertices": self.vertices, "z0": self.z0}


class MeshConfig(_Block):
    h_max: float = Field(0.1, gt=0.0, le=0.2)
    grading: float = Field(1.0, gt=0.0, le=1.0)
    min_angle: float = Field(20.0, ge=20.0, le=33.0)


class SolveConfig(_Block):
    epsilon_schedule: list[float] | None = None
    max_newton: int = Field(50, ge=1)
    tolerance: float = Field(1e-9, gt=0.0)
    stage_tolerance: float = Field(1e-6, gt=0.0)
    energy_tolerance: float = Field(1e-14, ge=0.0)
    linear_rtol: float = Field(1e-10, gt=0.0)
    near_field: float | None = Field(8.0, gt=0.0)
    damping: list[float] = [1.0, 0.5, 0.25]

    @field_validator("epsilon_schedule")
    @classmethod
    def _decreasing(cls, v: list[float] | None) -> list[float] | None:
        if v is not None:
            if not v or any(e < 0 for e in v) or any(b >= a for a, b in zip(v, v[1:])):
                raise ValueError("epsilon_schedule must be nonempty, nonnegative and strictly decreasing")
        return v

    def to_options(self) -> SolveOptions:
        return SolveOptions(
            epsilon_schedule=None if self.epsilon_schedule is None else tuple(self.epsilon_schedule),
            max_newton=self.max_newton,
            tolerance=self.tolerance,
            stage_tolerance=self.stage_tolerance,
            energy_tolerance=self.energy_tolerance,
            linear_rtol=self.linear_rtol,
            near_field=self.near_field,
            damping=tuple(self.damping),
        )


class AnalysisConfig(_Block):
    t_grid: list[float] = [0.4, 0.2, 0.1, 0.05, 0.02, 0.01]
    m_max: int = Field(5, ge=0, le=60)
    flux_levels: list[float] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    winding_levels: list[float] = [0.2, 0.5, 0.8]
    exceptional_levels: list[float] = [0.1, 0.05, 0.02, 0.01]
    radii: list[float] | None = None
    gauge_A: list[float] = [0.0, 1.0]
    regime: Literal["auto", "p<2", "p=2", "p>2"] = "auto"
    c_star: float | None = Field(None, ge=1.0)
    n_offsets: int = Field(8, ge=1)
    synthetic_alpha: float | None = Field(None, gt=0.0, lt=2.0)
    fundamental_thresholds: list[float] = [0.5, 2.0]
    harnack_balls: int = Field(8, ge=1)
    comparability_points: int = Field(8, ge=1)
    comparability_radii: list[float] = [0.5, 1.0, 2.0]

    @field_validator("t_grid")
    @classmethod
    def _moment_levels(cls, v: list[float]) -> list[float]:
        if not v or any(not (0.0 < t < 0.5) for t in v):
            raise ValueError("moment levels must lie in (0, 1/2)")
        return v

    @field_validator("flux_levels", "winding_levels")
    @classmethod
    def _levels(cls, v: list[float]) -> list[float]:
        if any(not (0.0 < t < 1.0) for t in v):
            raise ValueError("levels must lie in (0, 1)")
        return v

    @field_validator("exceptional_levels")
    @classmethod
    def _small_levels(cls, v: list[float]) -> list[float]:
        if any(not (0.0 < t < np.exp(-2.0)) for t in v):
            raise ValueError("exceptional levels must lie in (0, exp(-2))")
        return v

    @field_validator("fundamental_thresholds", "comparability_radii")
    @classmethod
    def _positive(cls, v: list[float]) -> list[float]:
        if not v or any(x <= 0 for x in v):
            raise ValueError("must be a nonempty list of positive lengths")
        return v

    @field_validator("gauge_A")
    @classmethod
    def _magnitudes(cls, v: list[float]) -> list[float]:
        if any(a < 0 for a in v):
            raise ValueError("gauge A values are magnitudes; the sign follows the regime")
        return v


class RunConfig(_Block):
    integrand: IntegrandConfig = IntegrandConfig()
    domain: DomainConfig = DomainConfig()
    mesh: MeshConfig = MeshConfig()
    solve: SolveConfig = SolveConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    output_dir: Path = Path("outputs")
    seed: int = Field(0, ge=0)


def _loc(err: dict[str, Any]) -> str:
    return ".".join(str(p) for p in err.get("loc", ())) or "<root>"


def validate_config(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        others = len(exc.errors()) - 1
        more = f" (+{others} more)" if others else ""
        raise ConfigError(f"{_loc(first)}: {first['msg']}{more}") from exc


def parse_overrides(items: Sequence[str]) -> dict[str, Any]:
    """KEY=VALUE pairs with TOML-typed values, e.g. tolerance=1e-8 or epsilon_schedule=[0.5, 0.0]."""
    out: dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"solve.{item}: override must look like KEY=VALUE")
        try:
            out[key.strip()] = tomllib.loads(f"v = {raw.strip()}")["v"]
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"solve.{key.strip()}: cannot parse {raw!r}") from exc
    return out


def load_config(
    path: str | Path,
    overrides: Sequence[str] = (),
    output_dir: str | Path | None = None,
    seed: int | None = None,
) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    # relative file references resolve against the config's directory
    integ = data.get("integrand", {})
    if isinstance(integ, dict) and "profile_file" in integ and not Path(integ["profile_file"]).is_absolute():
        integ["profile_file"] = str(path.parent / integ["profile_file"])
    if overrides:
        data.setdefault("solve", {}).update(parse_overrides(overrides))
    if output_dir is not None:
        data["output_dir"] = str(output_dir)
    if seed is not None:
        data["seed"] = seed
    return validate_config(data)
