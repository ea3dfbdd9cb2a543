"""Pipeline stages: solve -> measure -> analyze -> report, each persisted under the run directory."""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import pandas as pd

from fhm_lab import __version__
from fhm_lab.analysis import (
    DimensionTrend,
    GaugeFunction,
    dimension_report,
    dimension_trend,
    exceptional_flux,
    gauge_comparison,
    log_density,
    moment_bound_fit,
    moment_table,
    self_similar_radii,
    synthetic_measure,
    winding_number,
)
from fhm_lab.analysis.dimension import geometric_radii
from fhm_lab.errors import ChecksumError, InputError
from fhm_lab.geometry import ScalingFit, box_counting_dimension, densify_polyline, extract_level_curve, make_domain, mesh, read_mesh, write_mesh
from fhm_lab.integrand import Integrand, certify, power_integrand, quadratic_form_integrand, sampled_integrand
from fhm_lab.measure import (
    boundary_measure,
    comparability_sweep,
    compare_measures,
    level_flux,
    level_limit_measure,
    outer_boundary_points,
    read_measure_csv,
    write_measure_csv,
)
from fhm_lab.pipeline.config import IntegrandConfig, RunConfig
from fhm_lab.pipeline.manifest import RunManifest
from fhm_lab.solver import (
    energy,
    fundamental_inequality,
    harnack_diagnostic,
    interior_balls,
    read_field,
    residual,
    solve_capacitary,
    write_field,
)
from fhm_lab.utils.io import read_csv, write_csv
from fhm_lab.utils.logging import get_logger, log_stage
from fhm_lab.utils.schemas import CONVERGENCE_SCHEMA, DIMENSION_SCHEMA, MOMENT_SCHEMA, validate

logger = get_logger(__name__)

MESH_FILE = "mesh.txt"
FIELD_FILE = "field.txt"
CONVERGENCE_FILE = "convergence.csv"
MEASURE_FILE = "measure.csv"
LEVEL_LIMIT_FILE = "measure_level_limit.csv"
REPORT_FILE = "report.md"
# solve inputs; measure and analyze refuse to run if these changed since the solve
SOLVE_KEYS = ("integrand", "domain", "mesh")


@dataclass
class Run:
    config: RunConfig
    manifest: RunManifest

    @property
    def dir(self) -> Path:
        return self.config.output_dir

    @classmethod
    def open(cls, config: RunConfig, fresh: bool = False) -> "Run":
        existing = None if fresh else RunManifest.load(config.output_dir)
        if existing is None:
            existing = RunManifest(config=config.model_dump(mode="json"), version=__version__)
        return cls(config=config, manifest=existing)

    def check_inputs(self) -> None:
        current = self.config.model_dump(mode="json")
        for key in SOLVE_KEYS:
            if self.manifest.config.get(key) != current[key]:
                raise ChecksumError(f"[{key}] differs from the config the field was solved with; re-run solve")

    def emit_csv(self, name: str, df: pd.DataFrame) -> str:
        return self.manifest.record(self.dir, name, write_csv(df, self.dir / name))

    def finish(self, stage: str, t0: float, **results: Any) -> None:
        elapsed = time.perf_counter() - t0
        self.manifest.stages[stage] = round(elapsed, 6)
        self.manifest.results.update(results)
        self.manifest.save(self.dir)
        logger.info("stage finished", **log_stage(stage, elapsed, run_dir=str(self.dir)))


def build_integrand(cfg: IntegrandConfig, seed: int = 0) -> Integrand:
    if cfg.kind == "power":
        F = power_integrand(cfg.p)
    elif cfg.kind == "quadratic-form":
        F = quadratic_form_integrand(cfg.matrix, cfg.p)
    else:
        F = sampled_integrand(cfg.p, cfg.profile_file)
    if cfg.delta is not None:
        return F.with_delta(cfg.delta)
    return certify(F, n_samples=cfg.n_samples, seed=seed)


def stage_solve(config: RunConfig) -> Run:
    t0 = time.perf_counter()
    run = Run.open(config, fresh=True)
    F = build_integrand(config.integrand, config.seed)
    dom = make_domain(config.domain.kind, config.domain.params())
    m = mesh(dom, config.mesh.h_max, config.mesh.grading, config.mesh.min_angle)
    u = solve_capacitary(m, F, config.solve.to_options())

    run.manifest.record(run.dir, MESH_FILE, write_mesh(m, run.dir / MESH_FILE))
    run.manifest.record(run.dir, FIELD_FILE, write_field(u, run.dir / FIELD_FILE))
    history = validate(u.history, CONVERGENCE_SCHEMA, "convergence")
    run.emit_csv(CONVERGENCE_FILE, history)
    run.finish(
        "solve",
        t0,
        delta_certified=F.delta_certified,
        mesh_checksum=m.checksum,
        n_vertices=m.n_vertices,
        n_triangles=m.n_triangles,
        min_angle=m.min_angle(),
        energy=energy(u, F),
        residual=residual(u, F),
        normalization_scale=dom.normalization.scale,
        normalization_z0=list(dom.normalization.z0),
    )
    return run


def _load_solution(run: Run) -> tuple[Any, Any, Integrand]:
    run.check_inputs()
    m = read_mesh(run.manifest.require(run.dir, MESH_FILE))
    u = read_field(run.manifest.require(run.dir, FIELD_FILE), m)
    F = build_integrand(run.config.integrand, run.config.seed)
    return m, u, F


def stage_measure(config: RunConfig) -> Run:
    t0 = time.perf_counter()
    run = Run.open(config)
    _, u, F = _load_solution(run)
    mu = boundary_measure(u, F)
    limit = level_limit_measure(u, F)
    run.manifest.record(run.dir, MEASURE_FILE, write_measure_csv(mu, run.dir / MEASURE_FILE))
    run.manifest.record(run.dir, LEVEL_LIMIT_FILE, write_measure_csv(limit, run.dir / LEVEL_LIMIT_FILE))
    cmp = compare_measures(mu, limit)
    run.finish(
        "measure",
        t0,
        total_mass=mu.total_mass,
        clamped_mass=mu.clamped_mass,
        level_limit_mass=limit.total_mass,
        arc_ratio_min=cmp.ratio_min,
        arc_ratio_max=cmp.ratio_max,
    )
    return run


def _gauges(p: float, amplitudes: list[float], c_star: float) -> list[GaugeFunction]:
    signs = (1, -1) if p == 2.0 else (1 if p < 2.0 else -1,)
    return [GaugeFunction.for_regime(p, A, c_star, sign=s) for A in amplitudes for s in signs]


def stage_analyze(config: RunConfig) -> Run:
    t0 = time.perf_counter()
    run = Run.open(config)
    m, u, F = _load_solution(run)
    mu = read_measure_csv(run.manifest.require(run.dir, MEASURE_FILE))
    a = config.analysis
    regime = None if a.regime == "auto" else a.regime
    ld = log_density(u, F, regime)
    results: dict[str, Any] = {"c_prime": ld.c_prime, "excluded_area": ld.excluded_area}

    table = moment_table(u, F, ld, a.t_grid, a.m_max)
    run.emit_csv("moments.csv", validate(table.frame, MOMENT_SCHEMA, "moments"))
    run.emit_csv("moments_truncated.csv", moment_table(u, F, ld, a.t_grid, a.m_max, truncated=True).frame)
    if ld.regime == "p=2":
        other = ld.for_branch("neg")
        run.emit_csv("moments_neg.csv", moment_table(u, F, other, a.t_grid, a.m_max).frame)
    fit = moment_bound_fit(table)
    c_star = a.c_star if a.c_star is not None else max(fit.c_star_hat, 1.0)
    results.update(c_star_hat=fit.c_star_hat, c_star=c_star, bracket_slope=fit.slope)

    flux = pd.DataFrame({"t": a.flux_levels, "I0": [level_flux(u, F, t) for t in a.flux_levels]})
    run.emit_csv("flux.csv", flux)
    results["I0_spread"] = float((flux["I0"].max() - flux["I0"].min()) / flux["I0"].median())

    windings = []
    for t in a.winding_levels:
        w = winding_number(u, extract_level_curve(u, t))
        logger.info("winding number", level=t, winding=w)
        windings.append({"t": t, "winding": w})
    wind = pd.DataFrame(windings)
    run.emit_csv("winding.csv", wind)
    results["windings"] = wind["winding"].tolist()
    results["zeros_between_levels"] = int(-np.diff(wind["winding"].to_numpy()).sum()) if len(wind) > 1 else 0

    gauges = _gauges(F.p, a.gauge_A, c_star)
    exc = []
    for t in a.exceptional_levels:
        val = exceptional_flux(u, F, ld, t, gauges[0])
        exc.append({"t": t, "flux": val, "scaled": val * np.log(1.0 / t) ** 2})
    run.emit_csv("exceptional.csv", pd.DataFrame(exc))

    dom = make_domain(config.domain.kind, config.domain.params())
    fund = fundamental_inequality(u, dom, a.fundamental_thresholds)
    run.emit_csv("fundamental_inequality.csv", fund.table)
    for thr in a.fundamental_thresholds:
        results[_threshold_key(thr)] = fund.constant(thr)
    harnack = harnack_diagnostic(u, interior_balls(m, a.harnack_balls))
    run.emit_csv("harnack.csv", harnack.table)
    comp = comparability_sweep(u, mu, outer_boundary_points(u, a.comparability_points), a.comparability_radii)
    run.emit_csv("comparability.csv", comp)
    ratios = comp.loc[~comp["degenerate"].astype(bool), ["ratio_half", "ratio_double"]].to_numpy()
    results.update(
        harnack_max_ratio=harnack.max_ratio,
        comparability_ratio_min=float(ratios.min()) if ratios.size else None,
        comparability_ratio_max=float(ratios.max()) if ratios.size else None,
        comparability_degenerate=int(comp["degenerate"].sum()),
    )

    target, radii = mu, a.radii
    if a.synthetic_alpha is not None:
        target = synthetic_measure(a.synthetic_alpha)
        radii = radii or self_similar_radii(a.synthetic_alpha).tolist()
    summary, centers = [], []
    for g in gauges:
        cmp = gauge_comparison(target, g, radii)
        summary.append({"A": g.A, "sign": g.sign, **cmp.counts()})
        centers.append(cmp.table.assign(A=g.A, sign=g.sign))
    run.emit_csv("gauge_comparison.csv", pd.DataFrame(summary))
    run.emit_csv("gauge_centers.csv", pd.concat(centers, ignore_index=True))

    report = dimension_report(target, gauges[-1], radii=radii, n_offsets=a.n_offsets, seed=config.seed)
    dims = report.to_frame()
    if a.synthetic_alpha is None:
        box = _boundary_box_dimension(m)
        if box is not None:
            dims = pd.concat(
                [dims, pd.DataFrame([{"estimator": "box", "value": box.dimension, "ci_low": box.ci_low, "ci_high": box.ci_high}])],
                ignore_index=True,
            )
            results["box_dimension"] = box.dimension
    run.emit_csv("dimension.csv", validate(dims, DIMENSION_SCHEMA, "dimension"))
    run.emit_csv("dimension_centers.csv", report.centers)
    report.write_text(run.dir / "dimension.txt")
    run.manifest.record(run.dir, "dimension.txt")
    results.update(
        local_dimension=report.local_dimension,
        information_dimension=report.information.dimension if report.information else None,
        information_ci=[report.information.ci_low, report.information.ci_high] if report.information else None,
        below_gauge_at_r_min=report.below_gauge_at_r_min,
        synthetic_alpha=a.synthetic_alpha,
    )
    run.finish("analyze", t0, **results)
    return run


def _threshold_key(threshold: float) -> str:
    return "fundamental_c_" + f"{threshold:g}".replace(".", "_")


def _boundary_box_dimension(m: Any):
    pts = m.vertices[m.outer_loop]
    edge = float(np.median(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)))
    extent = float(np.ptp(pts, axis=0).max())
    sizes = geometric_radii(4.0 * edge, extent / 4.0)
    if len(sizes) < 3:
        logger.info("boundary too coarse for box counting", edge=edge, extent=extent)
        return None
    return box_counting_dimension(densify_polyline(pts, edge / 4.0), sizes)


def stage_report(config: RunConfig) -> Run:
    from fhm_lab.pipeline.report import render_report

    t0 = time.perf_counter()
    run = Run.open(config)
    if not run.manifest.files:
        raise ChecksumError(f"no manifest in {run.dir}; nothing to report")
    for name in list(run.manifest.files):
        run.manifest.require(run.dir, name)
    text = render_report(run.manifest, run.dir)
    (run.dir / REPORT_FILE).write_text(text)
    run.manifest.record(run.dir, REPORT_FILE)
    run.finish("report", t0)
    return run


def compare_runs(run_dirs: Sequence[str | Path], out: str | Path | None = None) -> DimensionTrend:
    """Information-dimension trend across finished runs that differ in p."""
    estimates: dict[float, ScalingFit] = {}
    for d in map(Path, run_dirs):
        manifest = RunManifest.load(d)
        if manifest is None:
            raise ChecksumError(f"no manifest in {d}; run the pipeline first")
        if manifest.config.get("analysis", {}).get("synthetic_alpha") is not None:
            raise InputError(f"{d} analyzed a synthetic measure, not its boundary measure")
        p = float(manifest.config["integrand"]["p"])
        if p in estimates:
            raise InputError(f"two runs with p = {p:g}")
        dims = read_csv(manifest.require(d, "dimension.csv"))
        row = dims.loc[dims["estimator"] == "information"]
        if row.empty:
            raise InputError(f"{d}: dimension.csv has no information-dimension row")
        r = row.iloc[0]
        estimates[p] = ScalingFit(float(r["value"]), float(r["ci_low"]), float(r["ci_high"]), np.nan, np.empty(0), np.empty(0))
    trend = dimension_trend(estimates)
    if out is not None:
        out = Path(out)
        write_csv(trend.table, out / "dimension_trend.csv")
        write_csv(trend.pairs, out / "dimension_trend_pairs.csv")
    return trend


def run_all(config: RunConfig) -> Run:
    stage_solve(config)
    stage_measure(config)
    stage_analyze(config)
    return stage_report(config)
