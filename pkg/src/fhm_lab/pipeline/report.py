"""Markdown run report rendered from the manifest and the stage tables.

Stage timings and the manifest timestamp stay out of the report so that its checksum only
changes with the results.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import pandas as pd
from jinja2 import Environment, PackageLoader, StrictUndefined

from fhm_lab.pipeline.manifest import RunManifest
from fhm_lab.utils.io import read_csv

TEMPLATE = "report.md.j2"


def _num(x: float | int | None, digits: int = 4) -> str:
    if x is None or (isinstance(x, float) and x != x):
        return "—"
    return f"{x:.{digits}g}"


def _pct(x: float | None) -> str:
    if x is None:
        return "—"
    return f"{100 * x:.1f}%"


def _table(df: pd.DataFrame | None, digits: int = 4) -> str:
    """Pipe table; floats rounded to `digits` significant figures."""
    if df is None or df.empty:
        return "_not computed_"
    head = "| " + " | ".join(df.columns) + " |"
    rule = "|" + "---|" * len(df.columns)
    rows = [
        "| " + " | ".join(_num(v, digits) if isinstance(v, float) else str(v) for v in row) + " |"
        for row in df.itertuples(index=False)
    ]
    return "\n".join([head, rule, *rows])


def _environment() -> Environment:
    env = Environment(
        loader=PackageLoader("fhm_lab.pipeline", "templates"),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters.update(num=_num, pct=_pct, table=_table)
    return env


def _load(run_dir: Path, manifest: RunManifest, name: str) -> pd.DataFrame | None:
    return read_csv(run_dir / name) if name in manifest.files else None


def render_report(manifest: RunManifest, run_dir: Path) -> str:
    moments = _load(run_dir, manifest, "moments.csv")
    if moments is not None:
        moments = moments.pivot(index="t", columns="m", values="log_I_m").reset_index()
        moments.columns = ["t"] + [f"log I_{m}" for m in moments.columns[1:]]
    ctx: dict[str, Any] = {
        "config": manifest.config,
        "version": manifest.version,
        "results": manifest.results,
        "files": manifest.files,
        "convergence": _load(run_dir, manifest, "convergence.csv"),
        "moments": moments,
        "flux": _load(run_dir, manifest, "flux.csv"),
        "winding": _load(run_dir, manifest, "winding.csv"),
        "exceptional": _load(run_dir, manifest, "exceptional.csv"),
        "gauges": _load(run_dir, manifest, "gauge_comparison.csv"),
        "dimension": _load(run_dir, manifest, "dimension.csv"),
        "fundamental": _load(run_dir, manifest, "fundamental_inequality.csv"),
        "harnack": _load(run_dir, manifest, "harnack.csv"),
    }
    if ctx["convergence"] is not None:
        ctx["convergence"] = ctx["convergence"].groupby("stage").tail(1)
    return _environment().get_template(TEMPLATE).render(**ctx)
