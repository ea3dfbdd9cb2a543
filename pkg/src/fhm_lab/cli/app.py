from __future__ import annotations

import argparse
import sys
from typing import Callable

from fhm_lab.analysis.dimension import P2_WINDOW
from fhm_lab.errors import (
    ChecksumError,
    ConfigError,
    FhmLabError,
    InputError,
    MeshGenerationError,
    NumericalError,
    SingularityError,
    WindingError,
)
from fhm_lab.pipeline import (
    RunConfig,
    compare_runs,
    load_config,
    run_all,
    stage_analyze,
    stage_measure,
    stage_report,
    stage_solve,
)
from fhm_lab.pipeline.stages import Run
from fhm_lab.utils.logging import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_CHECKSUM = 4

# most specific first
_EXIT_CODES: list[tuple[type[Exception], int]] = [
    (ChecksumError, EXIT_CHECKSUM),
    (ConfigError, EXIT_INPUT),
    (InputError, EXIT_INPUT),
    (NumericalError, EXIT_NUMERICAL),
    (MeshGenerationError, EXIT_NUMERICAL),
    (SingularityError, EXIT_NUMERICAL),
    (WindingError, EXIT_NUMERICAL),
]


def exit_code(exc: Exception) -> int:
    for kind, code in _EXIT_CODES:
        if isinstance(exc, kind):
            return code
    return EXIT_NUMERICAL


def _config(args: argparse.Namespace) -> RunConfig:
    return load_config(args.config, overrides=args.stage_tolerance, output_dir=args.out, seed=args.seed)


def _run(stage: Callable[[RunConfig], Run], args: argparse.Namespace) -> int:
    run = stage(_config(args))
    print(f"{args.cmd} done -> {run.dir}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    return _run(stage_solve, args)


def cmd_measure(args: argparse.Namespace) -> int:
    return _run(stage_measure, args)


def cmd_analyze(args: argparse.Namespace) -> int:
    return _run(stage_analyze, args)


def cmd_report(args: argparse.Namespace) -> int:
    return _run(stage_report, args)


def cmd_all(args: argparse.Namespace) -> int:
    return _run(run_all, args)


def cmd_compare(args: argparse.Namespace) -> int:
    trend = compare_runs(args.runs, args.out)
    for row in trend.table.itertuples():
        print(f"p = {row.p:g}: {row.value:.4f} [{row.ci_low:.4f}, {row.ci_high:.4f}]")
    window = "n/a" if trend.p2_in_window is None else ("inside" if trend.p2_in_window else "outside")
    print(f"trend {trend.status}; p = 2 estimate {window} {list(P2_WINDOW)}")
    return EXIT_OK if trend.passed else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fhm-lab")
    p.add_argument("--log-level", default=None, help="overrides FHM_LOG_LEVEL")
    p.add_argument("--log-json", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    for name, func, help_ in (
        ("solve", cmd_solve, "mesh the domain and solve for the capacitary function"),
        ("measure", cmd_measure, "extract the boundary measure from a solved field"),
        ("analyze", cmd_analyze, "moments, winding numbers, gauges and dimensions"),
        ("report", cmd_report, "render report.md from the manifest"),
        ("all", cmd_all, "solve, measure, analyze and report"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", required=True)
        s.add_argument("--out", default=None, help="run directory (default: output_dir from the config)")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument(
            "--stage-tolerance",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a [solve] setting, e.g. tolerance=1e-8; repeatable",
        )
        s.set_defaults(func=func)

    s = sub.add_parser("compare", help="information-dimension trend across runs with different p")
    s.add_argument("runs", nargs="+", help="finished run directories")
    s.add_argument("--out", default=None, help="directory for dimension_trend.csv")
    s.set_defaults(func=cmd_compare)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(level=args.log_level, json=args.log_json or None)
    try:
        return args.func(args)
    except FhmLabError as exc:
        code = exit_code(exc)
        logger.error("command failed", command=args.cmd, error=type(exc).__name__, message=str(exc), exit_code=code)
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
