"""Text persistence for CriticalLineTable ("XITAB1" format).

Layout::

    XITAB1
    t_max <17 digits>
    step <17 digits>
    fitted_C <17 digits>
    fitted_A <17 digits>
    abs_tol <17 digits>
    rows <int>
    <t> <Xi(t)>        (one line per row, 17 significant digits)

Seventeen significant digits round-trip a double exactly, so a reloaded
table is bit-identical to the one that was written.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .density import TABLE_VERSION, CriticalLineTable, row_count
from .errors import NumericalInstability

_HEADER_KEYS = ("t_max", "step", "fitted_C", "fitted_A", "abs_tol")


def _g17(v: float) -> str:
    return format(float(v), ".17g")


def dumps(table: CriticalLineTable) -> str:
    lines = [TABLE_VERSION]
    for key in _HEADER_KEYS:
        lines.append(f"{key} {_g17(getattr(table, key))}")
    lines.append(f"rows {len(table.values)}")
    for t, v in zip(table.ts, table.values):
        lines.append(f"{_g17(t)} {_g17(v)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> CriticalLineTable:
    lines = text.splitlines()
    if not lines or lines[0].strip() != TABLE_VERSION:
        raise NumericalInstability(f"not a {TABLE_VERSION} table")
    header = {}
    for line in lines[1:len(_HEADER_KEYS) + 2]:
        key, _, val = line.partition(" ")
        header[key] = val.strip()
    missing = [k for k in (*_HEADER_KEYS, "rows") if k not in header]
    if missing:
        raise NumericalInstability(f"table header lacks {', '.join(missing)}")
    n = int(header["rows"])
    body = lines[len(_HEADER_KEYS) + 2:]
    if len(body) != n:
        raise NumericalInstability(f"table declares {n} rows but has {len(body)}")
    data = np.array([[float(x) for x in line.split()] for line in body], dtype=float)
    if data.shape != (n, 2):
        raise NumericalInstability("table rows must have two columns")
    t_max, step = float(header["t_max"]), float(header["step"])
    if n != row_count(t_max, step):
        raise NumericalInstability("row count does not match t_max / step")
    ts = data[:, 0]
    if ts[0] != 0.0 or np.any(np.diff(ts) <= 0):
        raise NumericalInstability("t column must start at 0 and increase strictly")
    if np.any(ts != step * np.arange(n)):
        raise NumericalInstability("t column is not the uniform grid i * step")
    return CriticalLineTable(t_max, step, data[:, 1], float(header["fitted_C"]),
                             float(header["fitted_A"]), float(header["abs_tol"]))


def save(table: CriticalLineTable, path) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(table))
    os.replace(tmp, path)
    return path


def load(path) -> CriticalLineTable:
    return loads(Path(path).read_text())
