"""CSV readers and writers for series, descriptor tables and E_B curves.

Every file starts with optional ``# key: value`` comment lines followed by a
header row. Floats are written with 17 significant digits so a round trip is
exact, and writes go through a temporary file plus rename.
"""
from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .ergodicity import EBCurve
from .linstats import Descriptor, DescriptorSeries, EpochGrid
from .noise import SeriesMeta, TimeSeries


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_table(path, header, rows, comments: dict | None = None) -> Path:
    buf = io.StringIO()
    for key, value in (comments or {}).items():
        buf.write(f"# {key}: {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def read_table(path):
    """Return ``(comments, header, rows)`` with rows as lists of strings."""
    comments, lines = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                comments[key.strip()] = value.strip()
            elif line.strip():
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    return comments, header, list(reader)


def write_series(path, series: TimeSeries) -> Path:
    return write_table(path, ["value"], ([v] for v in series.values),
                       {"meta": series.meta.to_line()})


def read_series(path) -> TimeSeries:
    """Read a one-column series; any file with a ``value`` column is accepted."""
    comments, header, rows = read_table(path)
    col = header.index("value")
    meta = SeriesMeta.from_line(comments["meta"]) if "meta" in comments else SeriesMeta("file")
    return TimeSeries(np.array([float(r[col]) for r in rows]), meta)


def read_values(path) -> np.ndarray:
    """The ``value`` column of any table as floats (NaN preserved)."""
    _, header, rows = read_table(path)
    col = header.index("value")
    return np.array([float(r[col]) for r in rows])


def _grid_comments(ds: DescriptorSeries) -> dict:
    g = ds.grid
    return {
        "descriptor": ds.descriptor.value,
        "grid": f"epoch_length={g.epoch_length} epoch_count={g.epoch_count} "
                f"discarded_tail={g.discarded_tail}",
    }


def _parse_grid(text: str) -> EpochGrid:
    kv = dict(tok.split("=") for tok in text.split())
    return EpochGrid(int(kv["epoch_length"]), int(kv["epoch_count"]), int(kv["discarded_tail"]))


def write_descriptor(path, ds: DescriptorSeries) -> Path:
    comments = {"meta": ds.source_meta.to_line(), **_grid_comments(ds)}
    rows = ((i, v, f) for i, (v, f) in enumerate(zip(ds.values, ds.flags)))
    return write_table(path, ["epoch_index", "value", "flag"], rows, comments)


def read_descriptor(path) -> DescriptorSeries:
    comments, header, rows = read_table(path)
    meta = SeriesMeta.from_line(comments.get("meta", "generator=file"))
    values = np.array([float(r[1]) for r in rows])
    flags = tuple(r[2] if len(r) > 2 else "" for r in rows)
    return DescriptorSeries(Descriptor(comments["descriptor"]), values,
                            _parse_grid(comments["grid"]), meta, flags)


def write_descriptor_table(path, ensemble: list[DescriptorSeries]) -> Path:
    """Long-format table of one descriptor over many realizations."""
    first = ensemble[0]
    comments = {**_grid_comments(first), "realizations": len(ensemble)}
    rows = ((r, i, v, f) for r, ds in enumerate(ensemble)
            for i, (v, f) in enumerate(zip(ds.values, ds.flags)))
    return write_table(path, ["realization", "epoch_index", "value", "flag"], rows, comments)


def read_descriptor_table(path) -> list[DescriptorSeries]:
    comments, _, rows = read_table(path)
    grid = _parse_grid(comments["grid"])
    desc = Descriptor(comments["descriptor"])
    n = int(comments["realizations"])
    values = np.full((n, grid.epoch_count), np.nan)
    flags = [[""] * grid.epoch_count for _ in range(n)]
    for r, i, v, f in rows:
        values[int(r), int(i)] = float(v)
        flags[int(r)][int(i)] = f
    return [DescriptorSeries(desc, values[r], grid, SeriesMeta("table"), tuple(flags[r]))
            for r in range(n)]


def write_eb(path, curve: EBCurve) -> Path:
    comments = {"lag": curve.lag, "unit": curve.unit, "ensemble_size": curve.ensemble_size}
    rows = zip(curve.lengths, curve.eb, curve.n_used)
    return write_table(path, ["t", "eb", "n_used"], rows, comments)


def read_eb(path) -> EBCurve:
    comments, _, rows = read_table(path)
    t = np.array([int(r[0]) for r in rows])
    eb = np.array([float(r[1]) for r in rows])
    used = np.array([int(r[2]) for r in rows])
    return EBCurve(int(comments["lag"]), t, eb, used, int(comments["ensemble_size"]),
                   comments["unit"])
