"""CSV datasets and JSON reports.

Dataset files have a header ``x1,...,xp,y`` followed by numeric rows. Two
optional rows directly after the header whose ``y`` cell reads ``lower`` and
``upper`` give per-input bounds; when present the inputs are rescaled onto the
unit hypercube.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .benchmarks import rescale_to_unit
from .gp import TrainingSet


class ParseError(ValueError):
    """Malformed dataset file; ``row`` and ``col`` are 1-based file positions."""

    def __init__(self, message, row=None, col=None):
        where = f" at row {row}, column {col}" if row is not None else ""
        super().__init__(f"{message}{where}")
        self.row = row
        self.col = col


@dataclass
class Dataset:
    train: TrainingSet
    test: Optional[TrainingSet] = None
    input_bounds: Optional[np.ndarray] = None


def _fmt(v) -> str:
    return repr(float(v))


def write_csv(path, X, y=None, names=None, bounds=None):
    """Write a design (and outputs) with round-trip exact float formatting."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = X.shape[1]
    if names is None:
        names = [f"x{i + 1}" for i in range(p)] + (["y"] if y is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        if bounds is not None:
            b = np.asarray(bounds, dtype=float)
            w.writerow([_fmt(v) for v in b[:, 0]] + ["lower"])
            w.writerow([_fmt(v) for v in b[:, 1]] + ["upper"])
        for i, row in enumerate(X):
            cells = [_fmt(v) for v in row]
            if y is not None:
                cells.append(_fmt(y[i]))
            w.writerow(cells)


def write_table(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _number(cell: str, row: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise ParseError(f"non-numeric cell {cell!r}", row, col) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {cell!r}", row, col)
    return v


def read_matrix(path):
    """Header names and a float matrix from a plain numeric CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file")
    header = [h.strip() for h in rows[0]]
    data = []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} cells, found {len(row)}", r, len(row))
        data.append([_number(c, r, j) for j, c in enumerate(row, start=1)])
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def read_dataset(path):
    """Parse one dataset file into ``(X, y, bounds)``; ``bounds`` may be None."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file")
    header = [h.strip() for h in rows[0]]
    p = len(header) - 1
    expected = [f"x{i + 1}" for i in range(p)] + ["y"]
    if p < 1 or header != expected:
        raise ParseError(f"header must be {','.join(expected) if p >= 1 else 'x1,...,xp,y'}", 1, 1)
    bounds = {}
    X, y = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != p + 1:
            raise ParseError(f"expected {p + 1} cells, found {len(row)}", r, len(row))
        tag = row[-1].strip()
        if tag in ("lower", "upper"):
            if X or tag in bounds:
                raise ParseError(f"misplaced {tag} bounds row", r, p + 1)
            bounds[tag] = [_number(c, r, j) for j, c in enumerate(row[:-1], start=1)]
            continue
        cells = [_number(c, r, j) for j, c in enumerate(row, start=1)]
        X.append(cells[:-1])
        y.append(cells[-1])
    if len(bounds) == 1:
        raise ParseError("bounds need both a lower and an upper row")
    if len(X) < 2:
        raise ParseError("need at least two data rows")
    b = np.column_stack([bounds["lower"], bounds["upper"]]) if bounds else None
    return np.array(X), np.array(y), b


def ingest_csv(path, test_path=None) -> Dataset:
    """Load a training file (and optionally a test file) as a :class:`Dataset`.

    Bounds in the training file rescale both sets.
    """
    X, y, bounds = read_dataset(path)
    if bounds is not None:
        X = rescale_to_unit(X, bounds)
    test = None
    if test_path is not None:
        Xt, yt, tb = read_dataset(test_path)
        b = bounds if bounds is not None else tb
        if b is not None:
            Xt = rescale_to_unit(Xt, b)
        test = TrainingSet(Xt, yt)
    return Dataset(TrainingSet(X, y), test, bounds)


def write_samples(path, points, H):
    points = np.atleast_2d(points)
    p = points.shape[1] - 1
    names = [f"log_phi{i + 1}" for i in range(p)] + ["z_delta", "H"]
    write_table(path, names, [list(map(float, row)) + [float(h)] for row, h in zip(points, H)])


def read_samples(path):
    header, M = read_matrix(path)
    if header[-1] != "H" or header[-2] != "z_delta":
        raise ParseError("sample file must end with z_delta,H columns", 1, len(header))
    return M[:, :-1], M[:, -1]


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
