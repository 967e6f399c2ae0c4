"""CSV reading and the slope fits the figure annotations are built from.

This package talks to the solver harness only through its on-disk CSV
format, so the table layer is self-contained on purpose.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class Table:
    """Column-addressable float table."""

    def __init__(self, header: list, data: np.ndarray):
        self.header = list(header)
        self.data = data            # (n_rows, n_cols) float64

    def __len__(self) -> int:
        return self.data.shape[0]

    def has(self, name: str) -> bool:
        return name in self.header

    def col(self, name: str) -> np.ndarray:
        if name not in self.header:
            raise ValueError(f"missing column {name!r} "
                             f"(have {', '.join(self.header)})")
        return self.data[:, self.header.index(name)]


def read_table(path) -> Table:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ValueError(f"{path}: {e}") from None
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError(f"{path}: empty CSV (need a header and data rows)")
    header = [h.strip() for h in lines[0].split(",")]
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: line {i} has {len(cells)} cells, "
                             f"header has {len(header)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ValueError(f"{path}: line {i} is not numeric: {ln!r}") from None
    return Table(header, np.asarray(rows, dtype=np.float64))


def loglog_slope(x, y) -> tuple:
    """(slope, intercept) of the least-squares line through (log x, log y).

    Same algebra as the harness uses for its convergence verdicts, so the
    annotation printed on a figure agrees with the PASS/FAIL fit.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two or more paired samples")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit needs positive entries")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def error_columns(table: Table) -> list:
    """Column names that hold convergence errors, in header order."""
    return [name for name in table.header
            if name.startswith("l2") or name.startswith("h1")]


def convergence_fits(table: Table) -> dict:
    """{error column: (slope, intercept)} against the sigma column."""
    sigma = table.col("sigma")
    names = error_columns(table)
    if not names:
        raise ValueError("missing column: no l2*/h1* error columns found "
                         f"(have {', '.join(table.header)})")
    return {name: loglog_slope(sigma, table.col(name)) for name in names}
