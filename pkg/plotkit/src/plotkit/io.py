"""Strict readers for the CLI's CSV and JSON outputs."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


def read_columns(path, required=()):
    """CSV with a header row -> dict of float columns.

    Raises SchemaError on a missing file, an empty table or missing
    required columns.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    rows = [ln for ln in lines[1:] if ln.strip()]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} (have {header})")
    data = np.empty((len(rows), len(header)))
    for i, ln in enumerate(rows):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(parts)} fields, "
                              f"expected {len(header)}")
        data[i] = [float(p) for p in parts]
    return {name: data[:, j] for j, name in enumerate(header)}


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file not found: {path}")
    return json.loads(path.read_text(encoding="utf-8"))
