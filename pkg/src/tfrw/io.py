"""Deterministic CSV/JSON writers.

Floats are written with 17 significant digits so that every value round-trips
exactly; JSON keys are sorted so that identical inputs give identical bytes.
"""
import json
from pathlib import Path

import numpy as np


def write_csv(path, header, columns):
    columns = [np.asarray(c, dtype=float) for c in columns]
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("CSV columns must have equal length")
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Return ``(header, data)`` where ``data`` has one column per header field."""
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    data = np.loadtxt(text[1:], delimiter=",", ndmin=2)
    return header, data.T


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))
