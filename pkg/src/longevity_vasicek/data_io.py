"""Yield panels and their CSV / JSON representations."""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .affine import ModelParams

TREASURY_HEADER = ("Date", "Open", "High", "Low", "Close", "Adj Close", "Volume")
DEFAULT_TREASURY_TENOR = 10.0
TRADING_DAYS_PER_YEAR = 252


class DataError(ValueError):
    """Malformed input data. ``row`` is the 1-based data row when known."""

    def __init__(self, message: str, row: int | None = None, path: str | None = None):
        self.row = row
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


@dataclass(eq=False)
class YieldPanel:
    """Observed yields on a date x tenor grid; NaN marks a missing entry.

    ``times`` (years, optional) gives the observation clock. Without it the
    rows are treated as equally spaced at the filter's ``dt``.
    """

    dates: np.ndarray
    tenors: np.ndarray
    values: np.ndarray
    times: np.ndarray | None = None
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        self.dates = np.asarray(self.dates, dtype="datetime64[D]")
        self.tenors = np.atleast_1d(np.asarray(self.tenors, dtype=float))
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        self.values = values
        if values.shape != (self.dates.size, self.tenors.size):
            raise DataError(
                f"values shape {values.shape} does not match "
                f"{self.dates.size} dates x {self.tenors.size} tenors"
            )
        if self.dates.size and np.any(np.diff(self.dates) <= np.timedelta64(0, "D")):
            raise DataError("dates must be strictly increasing")
        if np.any(np.isinf(values)):
            raise DataError("observed yields must be finite")
        if self.times is not None:
            self.times = np.asarray(self.times, dtype=float)
            if self.times.shape != (self.dates.size,):
                raise DataError("times must have one entry per date")
            if np.any(np.diff(self.times) <= 0):
                raise DataError("times must be strictly increasing")

    def __len__(self) -> int:
        return self.dates.size

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def n_observed(self) -> int:
        return int((~self.missing).sum())

    @property
    def n_observed_steps(self) -> int:
        return int((~self.missing).any(axis=1).sum())

    def select(self, mask: np.ndarray) -> "YieldPanel":
        return YieldPanel(
            dates=self.dates[mask],
            tenors=self.tenors,
            values=self.values[mask],
            times=None if self.times is None else self.times[mask],
            source=dict(self.source),
        )

    def window(self, start: str | None = None, end: str | None = None) -> "YieldPanel":
        """Rows with ``start <= date <= end`` (ISO strings, either may be None)."""
        mask = np.ones(len(self), dtype=bool)
        if start is not None:
            mask &= self.dates >= np.datetime64(start, "D")
        if end is not None:
            mask &= self.dates <= np.datetime64(end, "D")
        return self.select(mask)


def _parse_date(text: str, row: int, path) -> np.datetime64:
    try:
        return np.datetime64(dt.date.fromisoformat(text.strip()), "D")
    except ValueError:
        raise DataError(f"unparseable date {text!r}", row=row, path=path) from None


def _parse_value(text: str, row: int, path, scale: float, allow_negative: bool = False) -> float:
    text = text.strip()
    if text == "" or text.lower() == "nan":
        return math.nan
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"unparseable number {text!r}", row=row, path=path) from None
    if not math.isfinite(value):
        raise DataError(f"non-finite yield {text!r}", row=row, path=path)
    value = value * scale
    if value < 0 and not allow_negative:
        raise DataError(f"negative yield {value!r}", row=row, path=path)
    return value


def parse_treasury_csv(
    path: str | os.PathLike,
    column: str = "Adj Close",
    tenor: float = DEFAULT_TREASURY_TENOR,
) -> YieldPanel:
    """Read one yield column from a daily Treasury quote file.

    Quotes are in percent and are converted to decimals. Empty or ``NaN``
    cells become missing entries.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("no data rows", path=str(path))
        header = [h.strip() for h in header]
        if "Date" not in header:
            raise DataError("header has no 'Date' column", path=str(path))
        if column not in header:
            raise DataError(f"unknown column {column!r}", path=str(path))
        i_date, i_col = header.index("Date"), header.index(column)
        dates, values = [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(i_date, i_col):
                raise DataError("too few fields", row=row_no, path=str(path))
            dates.append(_parse_date(row[i_date], row_no, str(path)))
            values.append(_parse_value(row[i_col], row_no, str(path), 0.01))
    if not dates:
        raise DataError("no data rows", path=str(path))
    panel = YieldPanel(
        dates=np.array(dates, dtype="datetime64[D]"),
        tenors=[tenor],
        values=np.array(values),
        source={"file": str(path), "column": column, "units": "percent"},
    )
    if panel.n_observed == 0:
        raise DataError("no observed values", path=str(path))
    return panel


def _format_tenor(tau: float) -> str:
    return repr(float(tau)).removesuffix(".0")


def read_panel_csv(path: str | os.PathLike) -> YieldPanel:
    """Read the wide panel format: ``Date,<tenor>,<tenor>,...`` in decimals.

    An optional ``time`` column right after ``Date`` carries the observation
    clock in years.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("no data rows", path=str(path))
        header = [h.strip() for h in header]
        if not header or header[0] != "Date":
            raise DataError("first column must be 'Date'", path=str(path))
        has_time = len(header) > 1 and header[1] == "time"
        tenor_cols = header[2:] if has_time else header[1:]
        try:
            tenors = [float(h) for h in tenor_cols]
        except ValueError:
            raise DataError(f"tenor columns must be numeric, got {tenor_cols}", path=str(path)) from None
        if not tenors:
            raise DataError("no tenor columns", path=str(path))
        dates, times, values = [], [], []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"expected {len(header)} fields, got {len(row)}", row=row_no, path=str(path))
            dates.append(_parse_date(row[0], row_no, str(path)))
            cells = row[1:]
            if has_time:
                times.append(_parse_value(cells[0], row_no, str(path), 1.0))
                cells = cells[1:]
            values.append([_parse_value(c, row_no, str(path), 1.0, allow_negative=True) for c in cells])
    if not dates:
        raise DataError("no data rows", path=str(path))
    return YieldPanel(
        dates=np.array(dates, dtype="datetime64[D]"),
        tenors=tenors,
        values=np.array(values),
        times=np.array(times) if has_time else None,
        source={"file": str(path), "units": "decimal"},
    )


def load_panel(path: str | os.PathLike, column: str | None = None, tenor: float | None = None) -> YieldPanel:
    """Dispatch on the header: Treasury quote files vs. the wide panel format."""
    with Path(path).open(newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        raise DataError("no data rows", path=str(path))
    header = [h.strip() for h in header]
    if column is not None or "Adj Close" in header:
        return parse_treasury_csv(
            path,
            column=column or "Adj Close",
            tenor=DEFAULT_TREASURY_TENOR if tenor is None else tenor,
        )
    return read_panel_csv(path)


def format_float(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def panel_rows(panel: YieldPanel) -> tuple[list[str], list[list[str]]]:
    header = ["Date"]
    if panel.times is not None:
        header.append("time")
    header += [_format_tenor(t) for t in panel.tenors]
    rows = []
    for i, d in enumerate(panel.dates):
        row = [str(d)]
        if panel.times is not None:
            row.append(format_float(panel.times[i]))
        row += [format_float(v) for v in panel.values[i]]
        rows.append(row)
    return header, rows


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_panel_csv(panel: YieldPanel, path: str | os.PathLike) -> None:
    atomic_write_text(path, csv_text(*panel_rows(panel)))


def load_params(path: str | os.PathLike) -> ModelParams:
    with Path(path).open() as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DataError("params file must hold a flat JSON object", path=str(path))
    return ModelParams.from_dict(data)


def treasury_sample_path() -> Path:
    """The 20-row daily 10-year Treasury sample (Dec 1992 - Jan 1993) shipped with the package."""
    return Path(str(resources.files("longevity_vasicek") / "data" / "treasury_sample.csv"))
