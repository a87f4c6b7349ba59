"""Dated data frames and their CSV round-trip.

The frame is a thin wrapper around a pandas DataFrame with a strictly
increasing DatetimeIndex. CSV emission formats every float with ``repr`` so
a load of an emitted file reproduces the values bit for bit.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DuplicateDate, NonNumericCell, ParseError, ZeroVariance

_QUARTER_RE = re.compile(r"^(\d{4})-?Q([1-4])$", re.IGNORECASE)


def parse_date(token: str) -> pd.Timestamp:
    """Parse an ISO-8601 date or a YYYY-Qn quarter label.

    Quarter labels are normalized to the first day of the quarter, so
    ``2003-Q2`` becomes ``2003-04-01``.
    """
    token = token.strip()
    m = _QUARTER_RE.match(token)
    if m:
        year, quarter = int(m.group(1)), int(m.group(2))
        return pd.Timestamp(year=year, month=3 * quarter - 2, day=1)
    try:
        return pd.Timestamp(token)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"cannot parse date {token!r}") from exc


def quarterly_dates(start: str, periods: int) -> pd.DatetimeIndex:
    """Quarter-start dates beginning at `start` (ISO or YYYY-Qn)."""
    return pd.date_range(parse_date(start), periods=periods, freq="QS")


@dataclass(frozen=True)
class TimeSeriesFrame:
    """Named numeric columns on a shared, strictly increasing date index."""

    data: pd.DataFrame = field(repr=False)

    def __post_init__(self) -> None:
        idx = self.data.index
        if not isinstance(idx, pd.DatetimeIndex):
            raise ParseError("frame index must hold dates")
        if idx.has_duplicates:
            dup = idx[idx.duplicated()][0]
            raise DuplicateDate(f"duplicated date {dup.date()}")
        if not idx.is_monotonic_increasing:
            object.__setattr__(self, "data", self.data.sort_index())
        for name in self.data.columns:
            if not np.issubdtype(self.data[name].dtype, np.number):
                raise NonNumericCell(f"column {name!r} is not numeric")

    # -- accessors ---------------------------------------------------------

    @property
    def dates(self) -> pd.DatetimeIndex:
        return self.data.index

    @property
    def columns(self) -> list[str]:
        return list(self.data.columns)

    def __len__(self) -> int:
        return len(self.data)

    def column(self, name: str) -> np.ndarray:
        if name not in self.data.columns:
            raise KeyError(f"no column {name!r} in frame")
        return self.data[name].to_numpy(dtype=float)

    def values(self, names: list[str] | None = None) -> np.ndarray:
        names = self.columns if names is None else names
        return self.data.loc[:, names].to_numpy(dtype=float)

    def select(self, names: list[str]) -> "TimeSeriesFrame":
        return TimeSeriesFrame(self.data.loc[:, names].copy())

    def with_columns(self, mapping: dict[str, np.ndarray]) -> "TimeSeriesFrame":
        out = self.data.copy()
        for name, col in mapping.items():
            out[name] = np.asarray(col, dtype=float)
        return TimeSeriesFrame(out)

    def complete_rows(self, names: list[str] | None = None) -> "TimeSeriesFrame":
        """Drop rows with missing values in the selected columns."""
        names = self.columns if names is None else names
        keep = ~self.data.loc[:, names].isna().any(axis=1)
        return TimeSeriesFrame(self.data.loc[keep].copy())


def frame_from_columns(dates: pd.DatetimeIndex,
                       columns: dict[str, np.ndarray]) -> TimeSeriesFrame:
    df = pd.DataFrame(
        {k: np.asarray(v, dtype=float) for k, v in columns.items()},
        index=pd.DatetimeIndex(dates),
    )
    return TimeSeriesFrame(df)


def load_frame(path: str) -> TimeSeriesFrame:
    """Load a CSV file with a `date` column into a TimeSeriesFrame.

    Raises
    ------
    ParseError
        Malformed file, missing `date` column, or ragged rows; the message
        carries the offending row number.
    NonNumericCell
        A data cell that is neither a float literal nor empty (missing).
    DuplicateDate
        Two rows with the same date.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "date" not in header:
            raise ParseError(f"{path}: no `date` column in header {header}")
        date_pos = header.index("date")
        value_names = [h for i, h in enumerate(header) if i != date_pos]

        dates: list[pd.Timestamp] = []
        rows: list[list[float]] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}"
                )
            try:
                dates.append(parse_date(row[date_pos]))
            except ParseError as exc:
                raise ParseError(f"{path}: row {row_no}: {exc}") from None
            values = []
            for col_no, cell in enumerate(row):
                if col_no == date_pos:
                    continue
                cell = cell.strip()
                if cell == "":
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    name = header[col_no]
                    raise NonNumericCell(
                        f"{path}: row {row_no}, column {name!r}: {cell!r}"
                    ) from None
            rows.append(values)

    if not rows:
        raise ParseError(f"{path}: no data rows")
    index = pd.DatetimeIndex(dates)
    if index.has_duplicates:
        dup = index[index.duplicated()][0]
        raise DuplicateDate(f"{path}: duplicated date {dup.date()}")
    df = pd.DataFrame(rows, columns=value_names, index=index, dtype=float)
    return TimeSeriesFrame(df.sort_index())


def _format_value(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return ""
    return repr(float(value))


def emit_frame(frame: TimeSeriesFrame, path: str) -> None:
    """Write a frame as CSV with full round-trip float precision."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["date"] + frame.columns)
        for date, row in zip(frame.dates, frame.data.to_numpy(dtype=float)):
            writer.writerow([date.strftime("%Y-%m-%d")] + [_format_value(v) for v in row])


def standardize(frame: TimeSeriesFrame, columns: list[str]) -> TimeSeriesFrame:
    """Rescale the selected columns to mean zero and unit sample variance.

    Other columns pass through untouched. Raises ZeroVariance when a selected
    column is constant over the sample.
    """
    out = frame.data.copy()
    for name in columns:
        col = frame.column(name)
        sd = np.std(col, ddof=1)
        if not np.isfinite(sd) or sd == 0.0:
            raise ZeroVariance(f"column {name!r} has zero variance")
        out[name] = (col - col.mean()) / sd
    return TimeSeriesFrame(out)
