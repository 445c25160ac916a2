"""CSV table loading with column validation."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

# columns that stay as strings; everything else is parsed as float
_TEXT_COLUMNS = {"channel", "bipartition", "split_class"}


class FigureError(RuntimeError):
    pass


class Table:
    """Column-oriented view of one sweep CSV."""

    def __init__(self, columns: dict):
        self.columns = columns
        self.n_rows = len(next(iter(columns.values()))) if columns else 0

    def __getitem__(self, name: str):
        try:
            return self.columns[name]
        except KeyError:
            raise FigureError(
                f"missing column '{name}' (have {sorted(self.columns)})"
            ) from None

    def where(self, mask) -> "Table":
        return Table({k: v[mask] for k, v in self.columns.items()})

    def unique(self, name: str):
        return np.unique(self[name])


def load_table(path: Path, required: tuple[str, ...]) -> Table:
    if not path.exists():
        raise FigureError(f"input file not found: {path}")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureError(f"empty CSV (no header): {path}") from None
        rows = list(reader)
    if not rows:
        raise FigureError(f"CSV has a header but no data rows: {path}")
    missing = set(required) - set(header)
    if missing:
        raise FigureError(
            f"{path} is missing columns {sorted(missing)}; header: {header}")
    cols = {}
    for j, name in enumerate(header):
        values = [r[j] for r in rows]
        if name in _TEXT_COLUMNS:
            cols[name] = np.array(values, dtype=object)
        else:
            try:
                cols[name] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise FigureError(
                    f"non-numeric value in column '{name}' of {path}: {exc}"
                ) from None
    return Table(cols)
