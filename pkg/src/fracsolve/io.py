"""CSV input and output.

Numbers are written with 17 significant digits so that a double survives a
write/read round trip unchanged. Files are written to a temporary name and
renamed into place, so a failed run never leaves a partial CSV behind.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import InvalidParams

__all__ = ["FLOAT_FORMAT", "write_csv", "write_field", "write_series", "write_profile", "read_table", "read_field"]

FLOAT_FORMAT = "%.17g"


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, columns, fmt=FLOAT_FORMAT):
    """Write equal-length columns under a header row (LF line endings)."""
    cols = [np.asarray(c).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise InvalidParams("CSV columns must have equal length")
    fmts = [("%d" if np.issubdtype(c.dtype, np.integer) else fmt) for c in cols]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(f % v for f, v in zip(fmts, row)))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_field(path, t, x, u, fmt=FLOAT_FORMAT):
    """``t,x,u`` rows, row-major over the tensor grid (x varies fastest)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != (t.size, x.size):
        raise InvalidParams(f"field shape {u.shape} does not match grid ({t.size}, {x.size})")
    T, X = np.meshgrid(t, x, indexing="ij")
    write_csv(path, ("t", "x", "u"), (T, X, u), fmt)


def write_series(path, coeffs, name="g_k", fmt=FLOAT_FORMAT):
    coeffs = np.asarray(coeffs, dtype=float)
    write_csv(path, ("k", name), (np.arange(1, coeffs.size + 1), coeffs), fmt)


def write_profile(path, x, values, name="g", fmt=FLOAT_FORMAT):
    write_csv(path, ("x", name), (x, values), fmt)


def read_table(path):
    """Read a two-column numeric CSV with a header row; returns ``(x, values)``."""
    path = Path(path)
    if not path.is_file():
        raise InvalidParams(f"table file not found: {path}")
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise InvalidParams(f"{path}: need a header row and data rows")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise InvalidParams(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            data.append((float(row[0]), float(row[1])))
        except ValueError:
            raise InvalidParams(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    arr = np.asarray(data)
    return arr[:, 0], arr[:, 1]


def read_field(path):
    """Inverse of :func:`write_field`: returns ``(t, x, u)``."""
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = np.unique(arr[:, 0])
    x = np.unique(arr[:, 1])
    return t, x, arr[:, 2].reshape(t.size, x.size)
