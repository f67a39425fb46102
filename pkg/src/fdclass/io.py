"""Reading and writing curve datasets as CSV.

Format: a header ``label,t=<t_1>,...,t=<t_N>`` followed by one row per curve,
the label (``0``, ``1`` or ``?`` for an unlabeled query) and then the ``N``
values.  Numbers are written with 17 significant digits, which round-trips
every float64 exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import Grid, LabeledSample
from .exceptions import ParseError

__all__ = ["Dataset", "load_csv", "save_csv", "UNLABELED"]

UNLABELED = -1


@dataclass(frozen=True, eq=False)
class Dataset:
    """All rows of a CSV file in file order; unlabeled rows carry label ``-1``."""

    grid: Grid
    X: np.ndarray
    labels: np.ndarray

    @property
    def labeled(self):
        return self.labels != UNLABELED

    @property
    def sample(self):
        """Labeled rows as a :class:`LabeledSample` (``None`` if there are none)."""
        mask = self.labeled
        if not mask.any():
            return None
        return LabeledSample(self.grid, self.X[mask], self.labels[mask])

    @property
    def queries(self):
        return self.X[~self.labeled]


def _num(text, lineno, what):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {what} {text!r}", lineno) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite {what} {text!r}", lineno)
    return value


def load_csv(path):
    """Parse a dataset file; raises :class:`ParseError` naming the offending line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if len(header) < 3 or header[0].strip() != "label":
            raise ParseError("header must be 'label,t=<t_1>,...,t=<t_N>' with N >= 2", 1)
        nodes = []
        for cell in header[1:]:
            cell = cell.strip()
            if not cell.startswith("t="):
                raise ParseError(f"header field {cell!r} is not of the form t=<value>", 1)
            nodes.append(_num(cell[2:], 1, "node"))
        nodes = np.array(nodes)
        if np.any(np.diff(nodes) <= 0):
            raise ParseError("non-increasing grid", 1)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != nodes.size + 1:
                raise ParseError(f"expected {nodes.size + 1} fields, found {len(row)}", lineno)
            tag = row[0].strip()
            if tag == "?":
                labels.append(UNLABELED)
            elif tag in ("0", "1"):
                labels.append(int(tag))
            else:
                raise ParseError(f"label must be 0, 1 or ?, found {tag!r}", lineno)
            rows.append([_num(v, lineno, "value") for v in row[1:]])
    X = np.array(rows, dtype=float).reshape(len(rows), nodes.size)
    return Dataset(Grid(nodes), X, np.array(labels, dtype=int))


def _fmt(v):
    return format(float(v), ".17g")


def save_csv(data, path, queries=None):
    """Write a :class:`LabeledSample` or :class:`Dataset` (plus optional unlabeled curves)."""
    if isinstance(data, Dataset):
        grid, X, labels = data.grid, data.X, data.labels
    else:
        grid, X, labels = data.grid, data.X, data.y
    if queries is not None:
        queries = grid.check_curves(np.atleast_2d(queries), "queries")
        X = np.vstack([X, queries])
        labels = np.concatenate([labels, np.full(len(queries), UNLABELED)])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", *(f"t={_fmt(t)}" for t in grid.nodes)])
        for lab, row in zip(labels, X):
            w.writerow(["?" if lab == UNLABELED else str(int(lab)), *(_fmt(v) for v in row)])
