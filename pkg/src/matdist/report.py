"""Report serialization with a fixed float format, plus the published schema."""

import csv
import json
import math

import jsonschema
import numpy as np

_NUM = {"type": ["number", "null"]}
_INT_LIST = {"type": "array", "items": {"type": "integer"}}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["law", "n", "grid", "classification", "dims", "second_grade_equal", "leaves",
                 "homogeneity", "warnings"],
    "properties": {
        "law": {"type": "string"},
        "n": {"type": "integer", "minimum": 2},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lo", "hi", "counts"],
            "properties": {
                "lo": {"type": "array", "items": {"type": "number"}},
                "hi": {"type": "array", "items": {"type": "number"}},
                "counts": _INT_LIST,
            },
        },
        "classification": {"enum": ["smoothly_uniform", "non_uniform", "uniform_second_grade", "mixed", None]},
        "dims": {
            "type": "object",
            "additionalProperties": False,
            "required": ["nh", "h"],
            "properties": {"nh": _INT_LIST, "h": _INT_LIST},
        },
        "second_grade_equal": {"type": "array", "items": {"type": "boolean"}},
        "leaves": {
            "type": "object",
            "additionalProperties": False,
            "required": ["count", "dims"],
            "properties": {"count": {"type": ["integer", "null"]}, "dims": _INT_LIST},
        },
        "homogeneity": {
            "type": "object",
            "additionalProperties": False,
            "required": ["verdict", "residual", "per_k"],
            "properties": {
                "verdict": {"enum": ["homogeneous", "not_homogeneous_at_degree", "inconclusive", None]},
                "residual": _NUM,
                "per_k": {"type": "array", "items": {"type": "number"}},
            },
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}


def format_float(v):
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("report values must be finite")
    return "%.17g" % v


def dumps(obj, indent=2, _level=0):
    """JSON text with every float written as ``%.17g``; key order is preserved."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return {None: "null", True: "true", False: "false"}[None if obj is None else bool(obj)]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        parts = [dumps(v, indent, _level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(pad + p for p in parts) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def validate_report(report):
    jsonschema.validate(report, REPORT_SCHEMA)


def write_report(report, path):
    validate_report(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(report) + "\n")


def write_grid_csv(path, grid, dim_nh, dim_h, labels=None):
    pts = grid.points
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index"] + [f"x{k + 1}" for k in range(grid.n)] + ["dim_nh", "dim_h", "leaf"])
        for i, x in enumerate(pts):
            leaf = "" if labels is None else int(labels[i])
            w.writerow([i] + [format_float(v) for v in x] + [int(dim_nh[i]), int(dim_h[i]), leaf])


def write_curve(path, curve):
    """Whitespace-separated columns, one point per line (gnuplot ``plot ... with lines``)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in np.atleast_2d(curve):
            fh.write(" ".join(format_float(v) for v in row) + "\n")
