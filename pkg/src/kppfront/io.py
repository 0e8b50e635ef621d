"""CSV/JSON writers shared by all modules.

CSV: ``,`` separator, ``.`` decimal point, LF line endings, 17 significant
digits, so round trips are lossless and repeated runs are byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_float(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_csv(path, header: Sequence[str], columns: Sequence[Iterable] | None = None,
              rows: Iterable[Sequence] | None = None) -> None:
    """Write either column arrays or row tuples."""
    if rows is None:
        rows = zip(*columns)
    lines = [",".join(header)]
    lines += [",".join(format_float(v) for v in row) for row in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def append_csv_row(path, header: Sequence[str], row: Sequence) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new = not path.exists()
    with open(path, "a", newline="\n") as fh:
        if new:
            fh.write(",".join(header) + "\n")
        fh.write(",".join(format_float(v) for v in row) + "\n")


def read_csv(path) -> dict[str, np.ndarray]:
    """Read a numeric CSV written by :func:`write_csv` into named columns."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if not header or header == [""]:
            raise ValueError(f"{path}: empty CSV")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: {data.shape[1]} columns, header has {len(header)}")
    return {name: data[:, i] for i, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_json(path, payload: dict) -> None:
    _atomic_write(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
