"""On-disk formats: comma-separated tables with full-precision floats and
sidecar key-value metadata files.

Floats are rendered with ``repr``, which is the shortest decimal string
that round-trips exactly, so every file reads back bit-identical.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .model import ObservedSeries


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path: Path, header: list[str], rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_table(path: Path) -> dict[str, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list[str]] = {name: [] for name in header}
        for row in reader:
            for name, v in zip(header, row):
                cols[name].append(v)
    return cols


def read_columns(path: Path) -> dict[str, np.ndarray]:
    """Read a table as float64 columns (non-numeric columns stay as strings)."""
    cols = read_table(path)
    out: dict[str, np.ndarray] = {}
    for name, vals in cols.items():
        try:
            out[name] = np.array([float(v) for v in vals])
        except ValueError:
            out[name] = np.array(vals)
    return out


def meta_path(path: Path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".meta")


def write_metadata(path: Path, meta: dict) -> None:
    """Sidecar ``<file>.meta`` with one ``key = value`` line per entry."""
    target = meta_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w") as fh:
        for key, value in meta.items():
            fh.write(f"{key} = {fmt(value)}\n")


def read_metadata(path: Path) -> dict[str, str]:
    out = {}
    with open(meta_path(path)) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition(" = ")
            out[key] = value
    return out


def write_series(path: Path, data: ObservedSeries, meta: dict | None = None) -> None:
    rows = (
        (t + 1, data.y[t], data.ln_rv[t]) for t in range(data.n)
    )
    write_table(path, ["t", "y", "ln_rv"], rows)
    if meta is not None:
        write_metadata(path, meta)


def read_series(path: Path) -> ObservedSeries:
    cols = read_columns(path)
    if "y" not in cols:
        raise ValueError(f"{path}: missing 'y' column")
    if "ln_rv" in cols:
        ln_rv = cols["ln_rv"]
    elif "rv" in cols:
        rv = cols["rv"]
        if np.any(rv <= 0.0):
            raise ValueError(f"{path}: 'rv' column must be strictly positive")
        ln_rv = np.log(rv)
    else:
        raise ValueError(f"{path}: need an 'ln_rv' or 'rv' column")
    return ObservedSeries(y=cols["y"], ln_rv=ln_rv)
