"""Canonical report serialization.

Reports are plain JSON with sorted keys and no timestamps, so identical run
configurations produce byte-identical files.  Traces can also be exported
as two-column CSV (n,value).
"""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert dataclasses, numpy scalars/arrays, and Fractions
    into JSON-serializable structures."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, float) and obj != obj:  # NaN is not valid JSON
        return "nan"
    if isinstance(obj, float) and obj in (float("inf"), float("-inf")):
        return "inf" if obj > 0 else "-inf"
    return obj


def render_json(payload: dict) -> bytes:
    text = json.dumps(
        to_jsonable(payload),
        sort_keys=True,
        indent=2,
        separators=(",", ": "),
        allow_nan=False,
    )
    return (text + "\n").encode("utf-8")


def trace_csv_bytes(points) -> bytes:
    lines = ["n,value"]
    for n, v in points:
        lines.append(f"{n},{v!r}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_bytes(path: str | Path, data: bytes) -> None:
    Path(path).write_bytes(data)
