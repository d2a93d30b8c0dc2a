#!/usr/bin/env python3
"""
Report writers: CSV series and JSON summaries.

Every output kind is described by one FIELDS table of FieldSpec entries.
Series fields become CSV columns in table order; summary fields go to the
JSON record and the CSV header comments. Floats are written with a fixed
format so equal results give byte-identical files.

utils/report_funcs.py for bpi-tails

(C) 2025 Stephen Jenkins

"""

# standard imports
import csv
import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

# external imports
import numpy as np

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class FieldSpec:
    column: Optional[str]  # CSV column name, or None for summary-only fields
    default: Any  # value used when the source has no entry
    data_type: str  # "series" (one value per row) or "summary"
    fmt: str = "float"

    def should_write(self) -> bool:
        """Return True if this field is a CSV column."""
        return self.column is not None and self.data_type == "series"


def _format_float(value) -> str:
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12e}"


# Dispatch map from FieldSpec.fmt to the cell formatter.
_FORMAT_MAP = {
    "float": _format_float,
    "int": lambda v: str(int(v)),
    "str": str,
}


PREDICTION_FIELDS: dict[str, FieldSpec] = {
    "x": FieldSpec(column="x", default=None, data_type="series"),
    "curve": FieldSpec(column="curve", default=None, data_type="series"),
    "lower": FieldSpec(column="lower_bound", default=None, data_type="series"),
    "upper": FieldSpec(column="upper_bound", default=None, data_type="series"),
    "G_tail": FieldSpec(column="G_tail", default=None, data_type="series"),
    "remainder_bound": FieldSpec(column="remainder_bound", default=None, data_type="series"),
    "D": FieldSpec(column=None, default=None, data_type="summary"),
    "b": FieldSpec(column=None, default=None, data_type="summary"),
    "d1": FieldSpec(column=None, default=None, data_type="summary"),
    "d2": FieldSpec(column=None, default=None, data_type="summary"),
    "regime": FieldSpec(column=None, default="", data_type="summary", fmt="str"),
    "rv_coefficient": FieldSpec(column=None, default=None, data_type="summary"),
}

ESTIMATE_FIELDS: dict[str, FieldSpec] = {
    "x": FieldSpec(column="x", default=None, data_type="series"),
    "p_hat": FieldSpec(column="p_hat", default=None, data_type="series"),
    "ci_low": FieldSpec(column="ci_low", default=None, data_type="series"),
    "ci_high": FieldSpec(column="ci_high", default=None, data_type="series"),
    "predicted": FieldSpec(column="predicted", default=math.nan, data_type="series"),
    "ratio": FieldSpec(column="ratio", default=math.nan, data_type="series"),
    "n_effective": FieldSpec(column=None, default=0, data_type="summary", fmt="int"),
}

WINDOW_FIELDS: dict[str, FieldSpec] = {
    "x": FieldSpec(column="x", default=None, data_type="series"),
    "hits": FieldSpec(column="hits", default=None, data_type="series", fmt="int"),
    "ratio": FieldSpec(column="window_ratio", default=None, data_type="series"),
    "within": FieldSpec(column="within_tolerance", default=None, data_type="series", fmt="int"),
    "D": FieldSpec(column=None, default=None, data_type="summary"),
}

PMF_FIELDS: dict[str, FieldSpec] = {
    "n": FieldSpec(column="n", default=None, data_type="series", fmt="int"),
    "p": FieldSpec(column="p", default=None, data_type="series"),
    "tail": FieldSpec(column="tail", default=None, data_type="series"),
    "mean": FieldSpec(column=None, default=None, data_type="summary"),
    "iterations": FieldSpec(column=None, default=0, data_type="summary", fmt="int"),
    "leaked": FieldSpec(column=None, default=0.0, data_type="summary"),
}

VERIFY_FIELDS: dict[str, FieldSpec] = {
    "x": FieldSpec(column="x", default=None, data_type="series"),
    "p_hat": FieldSpec(column="p_hat", default=None, data_type="series"),
    "predicted": FieldSpec(column="predicted", default=None, data_type="series"),
    "ratio": FieldSpec(column="ratio", default=None, data_type="series"),
    "lower": FieldSpec(column="lower_bound", default=None, data_type="series"),
    "upper": FieldSpec(column="upper_bound", default=None, data_type="series"),
    "within": FieldSpec(column="within_bounds", default=None, data_type="series", fmt="int"),
    "pre_asymptotic": FieldSpec(column="pre_asymptotic", default=None, data_type="series", fmt="int"),
    "coefficient": FieldSpec(column=None, default=None, data_type="summary"),
    "within_fraction": FieldSpec(column=None, default=None, data_type="summary"),
}

WALKMAX_FIELDS: dict[str, FieldSpec] = {
    "x": FieldSpec(column="x", default=None, data_type="series"),
    "p_hat": FieldSpec(column="p_hat", default=None, data_type="series"),
    "reference": FieldSpec(column="G_tail", default=None, data_type="series"),
    "ratio": FieldSpec(column="ratio", default=None, data_type="series"),
    "ci_low": FieldSpec(column="ratio_ci_low", default=None, data_type="series"),
    "ci_high": FieldSpec(column="ratio_ci_high", default=None, data_type="series"),
    "mean_sigma": FieldSpec(column=None, default=None, data_type="summary"),
    "far_ratio": FieldSpec(column=None, default=None, data_type="summary"),
}


def apply_fields(src: Dict[str, Any], FIELDS: dict[str, FieldSpec]) -> tuple[dict, dict]:
    """Split src into (series columns, summary values); missing keys take defaults."""
    series: dict = {}
    summary: dict = {}
    for name, spec in FIELDS.items():
        value = src.get(name, spec.default)
        if spec.should_write():
            series[name] = value
        else:
            summary[name] = value
    return series, summary


def to_jsonable(obj: Any) -> Any:
    """numpy scalars and arrays to python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(obj, Enum):
        return obj.value
    return obj


def write_csv(path: Path, src: Dict[str, Any], FIELDS: dict[str, FieldSpec], header: Optional[dict] = None) -> Path:
    """Write the series fields of src as CSV, summary fields and header as '# key: value' lines."""
    series, summary = apply_fields(src, FIELDS)
    raw = [(FIELDS[name], np.asarray(values)) for name, values in series.items()]
    rows = {values.size for _, values in raw if values.ndim > 0}
    if len(rows) > 1:
        LOGGER.error(f"write_csv: column lengths differ for {path}: {sorted(rows)}")
        raise ValueError(f"CSV columns have different lengths: {sorted(rows)}")
    # scalar defaults fill the whole column
    count = next(iter(rows), 1)
    columns = [(spec, np.full(count, values) if values.ndim == 0 else values) for spec, values in raw]
    rows = {count}

    comments = dict(header or {})
    comments.update({k: v for k, v in summary.items() if v is not None})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        for key, value in comments.items():
            handle.write(f"# {key}: {json.dumps(to_jsonable(value), sort_keys=True)}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([spec.column for spec, _ in columns])
        for i in range(rows.pop() if rows else 0):
            writer.writerow([_FORMAT_MAP[spec.fmt](values[i]) for spec, values in columns])
    LOGGER.debug(f"wrote {path}")
    return path


def write_json(path: Path, payload: Any) -> Path:
    """Write payload as sorted, indented JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n")
    LOGGER.debug(f"wrote {path}")
    return path
