"""Reading and writing dyad tables (``i,j,y,x`` with 1-based node labels)."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import DyadicDataset
from .errors import IngestError

HEADER = ("i", "j", "y", "x")


def fmt(value: float) -> str:
    """17 significant digits: enough for an exact float round trip."""
    return format(float(value), ".17g")


def read_dyads(path) -> DyadicDataset:
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc.strerror or exc}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != HEADER:
            raise IngestError(f"{path}: header must be {','.join(HEADER)}, got {','.join(header)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not f.strip() for f in rec):
                continue
            if len(rec) != 4:
                raise IngestError(f"{path}:{lineno}: expected 4 fields, got {len(rec)}")
            try:
                i, j = int(rec[0]), int(rec[1])
                y, x = float(rec[2]), float(rec[3])
            except ValueError:
                raise IngestError(f"{path}:{lineno}: cannot parse {rec!r}") from None
            rows.append((lineno, i, j, y, x))
    return _assemble(rows, str(path))


def _assemble(rows, source: str) -> DyadicDataset:
    if not rows:
        raise IngestError(f"{source}: no dyads")
    n = max(max(i, j) for _, i, j, _, _ in rows)
    y = np.zeros((n, n))
    x = np.zeros((n, n))
    seen = np.zeros((n, n), dtype=bool)
    for lineno, i, j, yv, xv in rows:
        if i < 1 or j < 1:
            raise IngestError(f"{source}:{lineno}: node labels start at 1, got ({i},{j})")
        if i == j:
            raise IngestError(f"{source}:{lineno}: self link ({i},{j}) is not allowed")
        if seen[i - 1, j - 1]:
            raise IngestError(f"{source}:{lineno}: duplicate dyad ({i},{j})")
        if not (np.isfinite(yv) and np.isfinite(xv)):
            raise IngestError(f"{source}:{lineno}: non-finite value for dyad ({i},{j})")
        seen[i - 1, j - 1] = True
        y[i - 1, j - 1] = yv
        x[i - 1, j - 1] = xv
    np.fill_diagonal(seen, True)
    if not seen.all():
        i, j = np.argwhere(~seen)[0]
        raise IngestError(f"{source}: missing dyad ({i + 1},{j + 1}); need all {n * (n - 1)} ordered pairs")
    try:
        return DyadicDataset(y=y, x=x)
    except ValueError as exc:
        raise IngestError(f"{source}: {exc}") from exc


def dyad_rows(data: DyadicDataset) -> Iterable[tuple]:
    n = data.n_nodes
    for i in range(n):
        for j in range(n):
            if i != j:
                yield i + 1, j + 1, data.y[i, j], data.x[i, j]


def write_dyads(path, data: DyadicDataset) -> None:
    with Path(path).open("w", newline="") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(HEADER)
        for i, j, y, x in dyad_rows(data):
            w.writerow((i, j, fmt(y), fmt(x)))
