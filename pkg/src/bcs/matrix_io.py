"""Plain-text matrix files: a ``rows,cols`` header, then one CSV line per row.

Values are written with ``repr``, the shortest decimal string that parses
back to the identical double, so round trips are bit-exact.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import ParseError

__all__ = ["emit_matrix_csv", "load_matrix_csv"]


def emit_matrix_csv(M, path):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got {M.ndim} dimensions")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(M.shape)
        for row in M:
            writer.writerow([repr(float(v)) for v in row])


def _positive_int(text, line, column):
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"expected an integer, got {text!r}", line, column) from None
    if value < 1:
        raise ParseError(f"dimension must be positive, got {value}", line, column)
    return value


def load_matrix_csv(path):
    """Read a matrix written by :func:`emit_matrix_csv`.

    Raises ParseError (with 1-based line and column) on a bad header, wrong
    row length, unparsable or non-finite value, or wrong row count; OSError
    propagates unchanged.
    """
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("empty file", 1)
    header = rows[0]
    if len(header) != 2:
        raise ParseError(f"header must be 'rows,cols', got {len(header)} fields", 1)
    n_rows = _positive_int(header[0].strip(), 1, 1)
    n_cols = _positive_int(header[1].strip(), 1, 2)
    body = rows[1:]
    while body and not body[-1]:
        body.pop()
    if len(body) != n_rows:
        raise ParseError(f"expected {n_rows} data rows, found {len(body)}", len(body) + 2)
    M = np.empty((n_rows, n_cols))
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != n_cols:
            raise ParseError(f"expected {n_cols} values, found {len(row)}", line)
        for j, text in enumerate(row):
            try:
                value = float(text)
            except ValueError:
                raise ParseError(f"not a number: {text!r}", line, j + 1) from None
            if not math.isfinite(value):
                raise ParseError(f"non-finite value {text!r}", line, j + 1)
            M[i, j] = value
    return M
