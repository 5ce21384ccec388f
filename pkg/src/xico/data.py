"""Sample container and the CSV ingestion path."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    ConstantResponse,
    DataError,
    DataFileNotFound,
    DimensionMismatch,
    MissingColumn,
    NoCovariates,
    NonFinite,
    NonNumericCell,
    TooFewRows,
)

PathLike = Union[str, os.PathLike]


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable sample ``{(X_i, Y_i)}``: ``x`` is ``(n, d)``, ``y`` is ``(n,)``.

    Arrays are copied and flagged read-only on construction, so a Dataset can
    be shared freely.
    """

    x: np.ndarray
    y: np.ndarray
    column_names: tuple = ()

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise DimensionMismatch(f"x must be 2-dimensional, got shape {x.shape}")
        if y.ndim != 1:
            raise DimensionMismatch(f"y must be 1-dimensional, got shape {y.shape}")
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"x has {x.shape[0]} rows but y has length {y.shape[0]}")
        if x.shape[0] < 2:
            raise TooFewRows(x.shape[0])
        if x.shape[1] < 1:
            raise NoCovariates()
        names = tuple(self.column_names) or tuple(
            [f"x{j + 1}" for j in range(x.shape[1])] + ["y"]
        )
        if len(names) != x.shape[1] + 1:
            raise DimensionMismatch(
                f"expected {x.shape[1] + 1} column names, got {len(names)}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def x_names(self) -> tuple:
        return self.column_names[:-1]

    @property
    def y_name(self) -> str:
        return self.column_names[-1]

    def with_x(self, x) -> "Dataset":
        return Dataset(x, self.y, self.column_names)

    def with_y(self, y) -> "Dataset":
        return Dataset(self.x, y, self.column_names)


@dataclass(frozen=True)
class DegenerateReport:
    """Why a structurally valid Dataset cannot be used by the estimators."""

    kind: str  # "constant_response" or "non_finite"
    message: str
    row: Optional[int] = None
    col: Optional[str] = None

    def to_error(self) -> DataError:
        if self.kind == "constant_response":
            return ConstantResponse()
        return NonFinite(self.row, self.col)


def validate(ds: Dataset) -> Union[Dataset, DegenerateReport]:
    """Return ``ds`` if it is usable, otherwise a :class:`DegenerateReport`.

    Rows in the report are 1-based data rows.
    """
    for arr, names in ((ds.x, ds.x_names), (ds.y[:, None], (ds.y_name,))):
        bad = ~np.isfinite(arr)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            err = NonFinite(int(i) + 1, names[j])
            return DegenerateReport("non_finite", str(err), err.row, err.col)
    if np.all(ds.y == ds.y[0]):
        return DegenerateReport("constant_response", str(ConstantResponse()))
    return ds


def require_valid(ds: Dataset) -> Dataset:
    """Like :func:`validate` but raises the matching error instead of reporting."""
    out = validate(ds)
    if isinstance(out, DegenerateReport):
        raise out.to_error()
    return out


def from_arrays(x, y, column_names: Optional[Sequence[str]] = None) -> Dataset:
    return Dataset(x, y, tuple(column_names) if column_names else ())


def load_csv(path: PathLike, y_column: str) -> Dataset:
    """Read a comma-separated file with a header row.

    ``y_column`` becomes the response; every other column, in file order,
    becomes a covariate. All cells must parse as floats.
    """
    if not os.path.isfile(path):
        raise DataFileNotFound(f"no such file: {os.fspath(path)}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TooFewRows(0) from None
        if header.count(y_column) != 1:
            raise MissingColumn(y_column)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"row {lineno} has {len(row)} cells, header has {len(header)}"
                )
            values = []
            for name, cell in zip(header, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise NonNumericCell(lineno, name, cell) from None
            rows.append(values)
    if len(rows) < 2:
        raise TooFewRows(len(rows))
    if len(header) < 2:
        raise NoCovariates()
    table = np.array(rows, dtype=float)
    yj = header.index(y_column)
    xcols = [j for j in range(len(header)) if j != yj]
    names = tuple(header[j] for j in xcols) + (y_column,)
    return Dataset(table[:, xcols], table[:, yj], names)


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(v)) if math.isfinite(v) else str(v)


def write_csv(ds: Dataset, path: PathLike) -> None:
    """Write ``ds`` so that :func:`load_csv` recovers it exactly (y last)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(ds.column_names)
        for xi, yi in zip(ds.x, ds.y):
            w.writerow([_fmt(v) for v in xi] + [_fmt(yi)])
