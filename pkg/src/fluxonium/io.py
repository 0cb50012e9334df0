"""Deterministic CSV/JSON writers with a provenance header.

No timestamps go into the header, so identical inputs give byte-identical
files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from . import __version__
from .params import CircuitParams

TOOL = "fluxonium"


def make_header(command: str, params: Optional[CircuitParams], options: Optional[Mapping] = None) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config_sha256": params.digest() if params is not None else None,
        "options": _plain(dict(options or {})),
    }


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(path, data, header: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps({"header": header, "data": _plain(data)}, indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def write_csv(path, rows: Iterable[Mapping], header: dict) -> Path:
    """CSV with ``# key: value`` header lines; columns follow the first row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = list(rows)
    with path.open("w", newline="") as fh:
        for key in ("tool", "version", "command", "config_sha256"):
            fh.write(f"# {key}: {header.get(key)}\n")
        fh.write(f"# options: {json.dumps(header.get('options', {}), sort_keys=True)}\n")
        if not rows:
            return path
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _plain(v) for k, v in row.items()})
    return path


def read_csv(path):
    """Inverse of write_csv: returns (header dict, list of row dicts as strings)."""
    header, lines = {}, []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition(": ")
                header[key] = value
            else:
                lines.append(line)
    return header, list(csv.DictReader(lines))
