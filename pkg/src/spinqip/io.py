"""Deterministic CSV / JSON writers used by every experiment output."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np


def format_number(x) -> str:
    """Decimal text for a number; exponent notation when ``0 < |x| < 1e-4``."""
    if isinstance(x, (str, bytes)):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0.0"
    if abs(x) < 1e-4:
        return f"{x:.12e}"
    text = f"{x:.15g}"
    if "e" in text or "." in text or "inf" in text or "nan" in text:
        return text
    return text + ".0"


def _meta_line(meta: dict) -> str:
    parts = [f"{k}={format_number(v) if not isinstance(v, str) else v}" for k, v in meta.items()]
    return "# " + ", ".join(parts)


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    """Comma-separated file with an optional ``# key=value`` metadata line, then a header row."""
    path = Path(path)
    lines = []
    if meta:
        lines.append(_meta_line(meta))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_number(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a file written by :func:`write_csv` (numeric columns only)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_json_atomic(path, obj) -> Path:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
