"""Column contracts for the tabular artifacts."""

from __future__ import annotations

import pandas as pd
import pandera as pa

from fhm_lab.errors import InputError

MEASURE_SCHEMA = pa.DataFrameSchema(
    {
        "arc_index": pa.Column(int, pa.Check.ge(0), unique=True),
        "midpoint_x": pa.Column(float),
        "midpoint_y": pa.Column(float),
        "arc_length": pa.Column(float, pa.Check.gt(0)),
        "weight": pa.Column(float, pa.Check.ge(0)),
    },
    strict=True,
    ordered=True,
    coerce=True,
)

CONVERGENCE_SCHEMA = pa.DataFrameSchema(
    {
        "stage": pa.Column(int, pa.Check.ge(0)),
        "iteration": pa.Column(int, pa.Check.ge(0)),
        "epsilon": pa.Column(float, pa.Check.ge(0)),
        "energy": pa.Column(float, pa.Check.ge(0)),
        "residual": pa.Column(float, pa.Check.ge(0)),
        "step": pa.Column(float, pa.Check.in_range(0, 1)),
        "clipped": pa.Column(float, pa.Check.ge(0)),
    },
    coerce=True,
)

MOMENT_SCHEMA = pa.DataFrameSchema(
    {
        "t": pa.Column(float, pa.Check.in_range(0, 1, include_min=False, include_max=False)),
        "m": pa.Column(int, pa.Check.ge(0)),
        "log_I_m": pa.Column(float),
    },
    strict=True,
    coerce=True,
)

DIMENSION_SCHEMA = pa.DataFrameSchema(
    {
        "estimator": pa.Column(str, pa.Check.isin(["local", "information", "box"])),
        "value": pa.Column(float, nullable=True),
        "ci_low": pa.Column(float, nullable=True),
        "ci_high": pa.Column(float, nullable=True),
    },
    coerce=True,
)


def validate(df: pd.DataFrame, schema: pa.DataFrameSchema, what: str) -> pd.DataFrame:
    try:
        return schema.validate(df)
    except (pa.errors.SchemaError, pa.errors.SchemaErrors) as exc:
        raise InputError(f"{what} table failed validation: {exc}") from exc
