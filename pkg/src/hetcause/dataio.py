"""CSV ingestion, validation and differencing of multivariate time series.

The :class:`Dataset` is the unit every pipeline stage consumes: a T x d
matrix of finite reals plus column names and optional time labels.  CSV is
the only ingestion format (RFC-4180 style, UTF-8, '.' decimal separator);
a time column is detected by name match only, no date parsing.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "Dataset",
    "Partition",
    "load_csv",
    "write_csv",
    "difference",
    "select_partition",
    "select_columns",
    "demean",
]


@dataclass(frozen=True)
class Dataset:
    """An observed multivariate series: T rows, d named columns.

    Immutable after construction and safe to share across threads.  Missing
    or non-finite values are a hard error, not imputed.
    """

    values: np.ndarray
    series_names: tuple[str, ...]
    time_labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"values must be a 2-d matrix, got shape {values.shape}")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "series_names", tuple(self.series_names))
        if self.time_labels is not None:
            object.__setattr__(self, "time_labels", tuple(self.time_labels))

        T, d = values.shape
        if T < 1:
            raise DataError("dataset must contain at least one row")
        if d < 1:
            raise DataError("dataset must contain at least one column")
        if not np.all(np.isfinite(values)):
            t, j = np.argwhere(~np.isfinite(values))[0]
            raise DataError(
                f"non-finite value in series {self.series_names[j]!r} at row {t + 1}"
            )
        if len(self.series_names) != d:
            raise DataError(
                f"{len(self.series_names)} series names for {d} columns"
            )
        if len(set(self.series_names)) != d:
            raise DataError("series names must be distinct")
        if self.time_labels is not None and len(self.time_labels) != T:
            raise DataError(
                f"{len(self.time_labels)} time labels for {T} rows"
            )

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


class Partition(NamedTuple):
    """A (d1, d2) block split of a dataset, X1 = leading d1 columns."""

    dataset: Dataset
    d1: int
    d2: int


def load_csv(
    path,
    delimiter: str = ",",
    header: bool = True,
    time_column: Optional[str] = None,
) -> Dataset:
    """Load a Dataset from a CSV file.

    Parameters
    ----------
    path : str or os.PathLike
        File to read.
    delimiter : str
        Field separator, default ','.
    header : bool
        Whether the first line carries column names.  Without a header,
        columns are named ``x1..xd`` and ``time_column`` cannot be used.
    time_column : str, optional
        Name of a column to treat as time labels.  Matched by name only;
        its cells are kept as strings and excluded from ``values``.

    Returns
    -------
    Dataset
        Columns in file order, time column excluded.

    Raises
    ------
    DataError
        Empty file, ragged rows, duplicate column names, or a cell that
        does not parse as a finite real (row and column are reported,
        1-based, counting the header line as row 1).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)]
    # a trailing newline yields an empty last record; drop fully empty rows
    rows = [row for row in rows if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"empty CSV file: {path}")

    if header:
        names = [cell.strip() for cell in rows[0]]
        data_rows = rows[1:]
        first_data_line = 2
        if len(set(names)) != len(names):
            raise DataError(f"duplicate column names in {path}: {names}")
    else:
        if time_column is not None:
            raise DataError("time_column requires a header line")
        names = [f"x{j + 1}" for j in range(len(rows[0]))]
        data_rows = rows
        first_data_line = 1
    if not data_rows:
        raise DataError(f"no data rows in {path}")

    arity = len(names)
    time_idx = None
    if time_column is not None:
        if time_column not in names:
            raise DataError(f"time column {time_column!r} not found in {names}")
        time_idx = names.index(time_column)

    value_names = [n for j, n in enumerate(names) if j != time_idx]
    values = np.empty((len(data_rows), len(value_names)))
    labels: list[str] = []
    for i, row in enumerate(data_rows):
        line_no = first_data_line + i
        if len(row) != arity:
            raise DataError(
                f"ragged row at line {line_no} of {path}: "
                f"expected {arity} fields, got {len(row)}"
            )
        k = 0
        for j, cell in enumerate(row):
            if j == time_idx:
                labels.append(cell.strip())
                continue
            try:
                x = float(cell)
            except ValueError:
                raise DataError(
                    f"cannot parse {cell.strip()!r} as a number at row {line_no}, "
                    f"column {names[j]!r} of {path}"
                ) from None
            if not np.isfinite(x):
                raise DataError(
                    f"non-finite value at row {line_no}, column {names[j]!r} of {path}"
                )
            values[i, k] = x
            k += 1

    return Dataset(
        values=values,
        series_names=tuple(value_names),
        time_labels=tuple(labels) if time_idx is not None else None,
    )


def write_csv(ds: Dataset, path, delimiter: str = ",") -> None:
    """Write a Dataset as CSV with 17 significant digits (round-trip exact)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        if ds.time_labels is not None:
            writer.writerow(("time",) + ds.series_names)
            for label, row in zip(ds.time_labels, ds.values):
                writer.writerow([label] + [format(v, ".17g") for v in row])
        else:
            writer.writerow(ds.series_names)
            for row in ds.values:
                writer.writerow([format(v, ".17g") for v in row])


def difference(ds: Dataset, order: int = 1) -> Dataset:
    """Apply the difference operator ``order`` times.

    Returns a Dataset of length T - order holding the order-th differences;
    names gain one 'Δ' prefix per order.
    """
    if order < 1:
        raise ValueError(f"order must be a positive integer, got {order}")
    if ds.T <= order:
        raise DataError(
            f"cannot difference {ds.T} rows to order {order}; need T > order"
        )
    values = np.diff(ds.values, n=order, axis=0)
    names = tuple("Δ" * order + n for n in ds.series_names)
    labels = ds.time_labels[order:] if ds.time_labels is not None else None
    return Dataset(values=values, series_names=names, time_labels=labels)


def select_partition(ds: Dataset, d1: int) -> Partition:
    """Fix the (d1, d2) split: X1 = first d1 columns, X2 the remaining d2.

    Column reordering is the caller's job before this call.
    """
    if not 1 <= d1 < ds.d:
        raise ValueError(
            f"d1 must satisfy 1 <= d1 < d; got d1={d1} with d={ds.d}"
        )
    return Partition(dataset=ds, d1=d1, d2=ds.d - d1)


def select_columns(ds: Dataset, names: Sequence[str]) -> Dataset:
    """Reorder (or subset) the columns by name; names must be distinct."""
    if len(set(names)) != len(names):
        raise DataError(f"duplicate names in column selection: {list(names)}")
    missing = [n for n in names if n not in ds.series_names]
    if missing:
        raise DataError(f"columns not found: {missing}; have {list(ds.series_names)}")
    idx = [ds.series_names.index(n) for n in names]
    return Dataset(
        values=ds.values[:, idx],
        series_names=tuple(names),
        time_labels=ds.time_labels,
    )


def demean(ds: Dataset) -> Dataset:
    """Subtract column means; the model itself carries no intercept."""
    return Dataset(
        values=ds.values - ds.values.mean(axis=0),
        series_names=ds.series_names,
        time_labels=ds.time_labels,
    )
