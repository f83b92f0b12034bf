"""Bit-stable CSV and JSON writers.

Floats use Python's shortest round-trip repr, lines end in ``\\n`` and files
are UTF-8.  Non-finite floats are written as ``inf``, ``-inf`` or ``nan``
(as strings inside JSON, which has no literal for them).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError


def format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror}", "out") from None


def write_csv(path, header: list[str], rows) -> Path:
    path = Path(path)
    with _open(path) as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    text = dumps_json(obj)
    with _open(path) as fh:
        fh.write(text)
    return path


def emit(results, fmt: str, path, header: list[str] | None = None) -> Path:
    """Write ``results`` as CSV (rows plus ``header``) or JSON."""
    if fmt == "csv":
        if header is None:
            raise ValueError("CSV output needs a header")
        return write_csv(path, header, results)
    if fmt == "json":
        return write_json(path, results)
    raise ValueError(f"unknown format {fmt!r}")
