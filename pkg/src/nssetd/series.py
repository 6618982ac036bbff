"""CSV emission and reading for traces and convergence tables."""

from __future__ import annotations

import math
import os
import tempfile

import numpy as np

TRACE_COLUMNS = ("t", "energy", "modified_energy", "roughness", "slope", "char_length", "mass_mean")
CONVERGENCE_COLUMNS = ("N", "h", "dt", "err_l1", "err_l2", "err_linf")


def atomic_write_bytes(path, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return format(v, ".17g")


def format_rows(columns, rows) -> str:
    out = [",".join(columns)]
    out.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(out) + "\n"


def write_series(obj, path) -> None:
    """Write a ``CoarseningTrace`` or ``ConvergenceResult`` as CSV."""
    atomic_write_text(path, format_rows(obj.columns, obj.as_rows()))


def read_series(path) -> dict:
    """Read a CSV written by :func:`write_series` into ``{column: ndarray}``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValueError(f"{path}: empty file")
        cols = header.split(",")
        data = [[float(x) for x in line.split(",")] for line in fh if line.strip()]
    arr = np.array(data, dtype=float).reshape(len(data), len(cols))
    return {c: arr[:, i] for i, c in enumerate(cols)}
