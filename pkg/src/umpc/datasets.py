"""Dataset ingestion: CSV loading with typed columns, plus synthetic draws.

Columns are parsed by role. Numeric columns are float-parsed and min-max
normalized into [0, 1] by default; categorical columns are integer-coded
in order of first appearance; label columns map onto {-1, +1}. Rows with
missing tokens are dropped and counted rather than imputed.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from umpc.errors import ParseError, UsageError

__all__ = ["ROLES", "Dataset", "load_csv", "gen_synthetic"]

ROLES = ("numeric", "categorical", "label")

_MISSING = {"", "?", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class Dataset:
    """Parsed columns as a float64 matrix of shape (n, ncols)."""

    values: np.ndarray
    columns: tuple[str, ...]
    kinds: tuple[str, ...]
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return self.values.shape[0]


def _parse_numeric(token: str, name: str, row: int) -> float:
    try:
        val = float(token)
    except ValueError:
        raise ParseError(
            f"column {name!r}, row {row}: cannot parse {token!r} as a number"
        ) from None
    if not math.isfinite(val):
        raise ParseError(f"column {name!r}, row {row}: non-finite value {token!r}")
    return val


def _encode_labels(tokens: list[str], name: str) -> np.ndarray:
    distinct = sorted(set(tokens))
    try:
        as_float = [float(t) for t in distinct]
    except ValueError:
        as_float = None
    if as_float is not None and set(as_float) <= {-1.0, 1.0}:
        return np.array([float(t) for t in tokens])
    if len(distinct) == 2:
        mapping = {distinct[0]: -1.0, distinct[1]: 1.0}
        return np.array([mapping[t] for t in tokens])
    raise ParseError(
        f"column {name!r}: labels must be +-1 or exactly two distinct values,"
        f" got {distinct[:5]}"
    )


def load_csv(
    path: str,
    columns: list[str] | tuple[str, ...] | None = None,
    roles: list[str] | tuple[str, ...] | None = None,
    normalization: str = "minmax",
) -> Dataset:
    """Load selected columns from a headered CSV file.

    Args:
      path: file to read; the first row must be a header.
      columns: names to keep, in output order (default: all, file order).
      roles: per-column role from ROLES (default: all numeric).
      normalization: "minmax" rescales numeric columns to [0, 1] (a
        constant column becomes zeros with a warning); "none" keeps raw
        values.

    Raises ParseError with the column name and 1-based data-row index on
    the first malformed cell. Rows containing a missing token in any
    selected column are dropped; the count is reported on the Dataset.
    """
    if normalization not in ("minmax", "none"):
        raise UsageError(f"unknown normalization {normalization!r}")
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if columns is None:
            columns = tuple(header)
        missing_cols = [c for c in columns if c not in header]
        if missing_cols:
            raise UsageError(f"columns {missing_cols} not found in header {header}")
        idx = [header.index(c) for c in columns]
        if roles is None:
            roles = ("numeric",) * len(columns)
        if len(roles) != len(columns):
            raise UsageError("roles and columns must have the same length")
        for role in roles:
            if role not in ROLES:
                raise UsageError(f"unknown role {role!r}; choose from {ROLES}")

        kept: list[list[str]] = []
        dropped = 0
        for row_num, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if max(idx) >= len(row):
                raise ParseError(f"row {row_num}: expected {len(header)} fields, got {len(row)}")
            cells = [row[i].strip() for i in idx]
            if any(c.lower() in _MISSING for c in cells):
                dropped += 1
                continue
            kept.append(cells)

    if not kept:
        raise ParseError(f"{path}: no usable data rows")

    out = np.empty((len(kept), len(columns)))
    for j, (name, role) in enumerate(zip(columns, roles)):
        tokens = [r[j] for r in kept]
        if role == "numeric":
            col = np.array([
                _parse_numeric(t, name, i + 1) for i, t in enumerate(tokens)
            ])
            if normalization == "minmax":
                lo, hi = col.min(), col.max()
                if hi > lo:
                    col = (col - lo) / (hi - lo)
                else:
                    warnings.warn(f"column {name!r} is constant; normalized to zeros")
                    col = np.zeros_like(col)
        elif role == "categorical":
            codes: dict[str, int] = {}
            for t in tokens:
                codes.setdefault(t, len(codes))
            col = np.array([float(codes[t]) for t in tokens])
        else:
            col = _encode_labels(tokens, name)
        out[:, j] = col
    return Dataset(out, tuple(columns), tuple(roles), dropped)


def gen_synthetic(n: int, kind: str, rng: np.random.Generator) -> Dataset:
    """Draw a synthetic dataset: uniform01, uniform01_pairs, or categorical(c)."""
    if n < 1:
        raise UsageError("need at least one row")
    if kind == "uniform01":
        return Dataset(rng.random((n, 1)), ("x",), ("numeric",))
    if kind == "uniform01_pairs":
        return Dataset(rng.random((n, 2)), ("x", "y"), ("numeric", "numeric"))
    if kind.startswith("categorical(") and kind.endswith(")"):
        body = kind[len("categorical(") : -1]
        try:
            classes = int(body)
        except ValueError:
            raise UsageError(f"bad category count {body!r}") from None
        if classes < 1:
            raise UsageError("need at least one category")
        vals = rng.integers(0, classes, size=(n, 1)).astype(np.float64)
        return Dataset(vals, ("cat",), ("categorical",))
    raise UsageError(
        f"unknown synthetic kind {kind!r}; expected uniform01, uniform01_pairs,"
        " or categorical(c)"
    )
