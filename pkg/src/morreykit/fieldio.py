"""
Field import/export.

Two formats, both self-describing enough to round-trip a field:

* CSV (schema ``morreykit.field.csv.v1``): header line ``index,re,im``, one
  row per grid point in flat C order.  The grid is supplied by the caller on
  read.
* Binary (schema ``morreykit.field.bin.v1``): little-endian throughout; a
  header of three IEEE-754 doubles (dimension n, points per axis N, box side
  length), followed by N^n complex samples as interleaved (re, im) doubles in
  flat C order.  The grid is reconstructed from the header on read.

All writes go through a temporary file in the destination directory followed
by an atomic rename, so a crashed run never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import os
import tempfile

import numpy as np

from .grid import Field, Grid

__all__ = [
    "CSV_SCHEMA",
    "BINARY_SCHEMA",
    "atomic_write_bytes",
    "atomic_write_text",
    "write_field_csv",
    "read_field_csv",
    "write_field_binary",
    "read_field_binary",
]

CSV_SCHEMA = "morreykit.field.csv.v1"
BINARY_SCHEMA = "morreykit.field.bin.v1"


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write bytes to path via a same-directory temp file and atomic rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_field_csv(path: str, f: Field) -> None:
    lines = ["index,re,im"]
    for i, v in enumerate(f.flat):
        lines.append(f"{i},{float(v.real)!r},{float(v.imag)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_field_csv(path: str, grid: Grid) -> Field:
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != ["index", "re", "im"]:
            raise ValueError(f"unexpected CSV header {header!r}")
        samples = np.zeros(grid.size, dtype=complex)
        seen = 0
        for row in reader:
            idx = int(row[0])
            samples[idx] = float(row[1]) + 1j * float(row[2])
            seen += 1
    if seen != grid.size:
        raise ValueError(f"expected {grid.size} rows, got {seen}")
    return Field(grid, samples.reshape(grid.shape))


def write_field_binary(path: str, f: Field) -> None:
    header = np.array([f.grid.dimension, f.grid.points_per_axis, f.grid.domain_length],
                      dtype="<f8")
    body = np.ascontiguousarray(f.flat, dtype="<c16")
    atomic_write_bytes(path, header.tobytes() + body.tobytes())


def read_field_binary(path: str) -> Field:
    with open(path, "rb") as handle:
        raw = handle.read()
    header = np.frombuffer(raw[:24], dtype="<f8")
    dimension, points, length = int(header[0]), int(header[1]), float(header[2])
    grid = Grid(dimension, points, length)
    samples = np.frombuffer(raw[24:], dtype="<c16")
    if samples.size != grid.size:
        raise ValueError(f"expected {grid.size} samples, got {samples.size}")
    return Field(grid, samples.reshape(grid.shape).copy())
