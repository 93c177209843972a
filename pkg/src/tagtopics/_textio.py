"""Low-level helpers for the line-oriented text formats.

Probabilities are written with ``repr`` (shortest round-trip form), so a
write/read cycle reproduces the exact float64 values.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def format_row(values) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values).ravel())


def next_fields(stream, what: str = "data") -> list[str]:
    """Whitespace-split fields of the next non-blank, non-comment line."""
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        return line.split()
    raise DataError(f"unexpected end of file while reading {what}")


def parse_ints(fields: list[str], what: str) -> list[int]:
    try:
        return [int(tok) for tok in fields]
    except ValueError:
        raise DataError(f"{what}: expected integers, got {fields!r}") from None


def parse_row(stream, length: int, what: str) -> np.ndarray:
    if length < 1:
        raise DataError(f"{what}: dimension must be positive, got {length}")
    fields = next_fields(stream, what)
    if len(fields) != length:
        raise DataError(f"{what}: expected {length} values, got {len(fields)}")
    try:
        return np.array([float(tok) for tok in fields], dtype=float)
    except ValueError:
        raise DataError(f"{what}: non-numeric value") from None


def parse_matrix(stream, n_rows: int, n_cols: int, what: str) -> np.ndarray:
    if n_rows < 1:
        raise DataError(f"{what}: dimension must be positive, got {n_rows}")
    rows = [parse_row(stream, n_cols, f"{what} row {i}") for i in range(n_rows)]
    return np.vstack(rows)
