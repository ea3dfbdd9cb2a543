"""Config-driven runs: solve, measure, analyze and report into one output directory."""

from fhm_lab.pipeline.config import RunConfig, load_config, parse_overrides, validate_config
from fhm_lab.pipeline.manifest import MANIFEST_NAME, RunManifest
from fhm_lab.pipeline.stages import (
    Run,
    build_integrand,
    compare_runs,
    run_all,
    stage_analyze,
    stage_measure,
    stage_report,
    stage_solve,
)

__all__ = [
    "MANIFEST_NAME",
    "Run",
    "RunConfig",
    "RunManifest",
    "build_integrand",
    "compare_runs",
    "load_config",
    "parse_overrides",
    "run_all",
    "stage_analyze",
    "stage_measure",
    "stage_report",
    "stage_solve",
    "validate_config",
]
