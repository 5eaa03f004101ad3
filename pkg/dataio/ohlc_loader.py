#!/usr/bin/env python3
"""
OHLC Loader Module
Parses Yahoo-Finance style exchange-rate exports, forward-fills gaps and
orients the close-rate series
"""

import io
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .fetcher import decode_csv_bytes, fetch_remote
from utils.errors import (
    DataFormatError,
    DomainError,
    EmptyInputError,
    InsufficientDataError,
    RowParseError,
    SourceNotFoundError,
    UnrecoverableDataError,
)

logger = logging.getLogger(__name__)

SAMPLE_DATA_PATH = Path(__file__).resolve().parent.parent / "data" / "sample_usdbdt.csv"

PRICE_FIELDS = ("open", "high", "low", "close")
MISSING_TOKENS = {"", "null", "nan", "none"}
DATE_FORMAT = "%Y-%m-%d"


class Orientation(str, Enum):
    """Quote direction of a rate series.

    USD_PER_BDT is the feed's ticker convention (taka per dollar, ~83-110);
    BDT_PER_USD is the inverted reading (~0.012-0.009).
    """

    USD_PER_BDT = "USD/BDT"
    BDT_PER_USD = "BDT/USD"

    def flipped(self) -> "Orientation":
        if self is Orientation.USD_PER_BDT:
            return Orientation.BDT_PER_USD
        return Orientation.USD_PER_BDT


@dataclass(frozen=True)
class OhlcBar:
    """One daily quote. None marks a missing cell."""

    date: date
    open: Optional[float]
    high: Optional[float]
    low: Optional[float]
    close: Optional[float]
    volume: Optional[float] = None

    def missing_fields(self) -> List[str]:
        return [name for name in PRICE_FIELDS if getattr(self, name) is None]


@dataclass
class ValidationReport:
    """Findings collected while cleaning a feed; never rejects data"""

    rows_in: int = 0
    rows_out: int = 0
    filled_cells: int = 0
    dropped_dates: List[str] = field(default_factory=list)
    duplicate_dates: List[str] = field(default_factory=list)
    ohlc_violations: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "rows_in": self.rows_in,
            "rows_out": self.rows_out,
            "filled_cells": self.filled_cells,
            "dropped_rows": len(self.dropped_dates),
            "dropped_dates": list(self.dropped_dates),
            "duplicate_dates": list(self.duplicate_dates),
            "ohlc_violations": list(self.ohlc_violations),
        }


def _check_positive(dates: Sequence[date], values: np.ndarray) -> None:
    bad = np.flatnonzero(~np.isfinite(values) | (values <= 0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"rate on {dates[i].isoformat()} is {values[i]!r}; rates must be finite and > 0")


@dataclass(frozen=True, eq=False)
class RateSeries:
    """Cleaned close-rate series with explicit quote orientation"""

    dates: Tuple[date, ...]
    values: np.ndarray
    orientation: Orientation = Orientation.USD_PER_BDT

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        dates = tuple(self.dates)
        if values.ndim != 1 or len(dates) != values.size:
            raise DataFormatError("dates and values must be 1-D and the same length")
        if values.size < 2:
            raise InsufficientDataError(f"a rate series needs at least 2 points, got {values.size}")
        for prev, cur in zip(dates, dates[1:]):
            if cur <= prev:
                raise DataFormatError(f"dates must be strictly increasing ({prev} then {cur})")
        _check_positive(dates, values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    def __len__(self) -> int:
        return self.values.size


def _parse_number(cell: object, line_number: int, column: str) -> Optional[float]:
    if not isinstance(cell, str):
        return None
    token = cell.strip()
    if token.lower() in MISSING_TOKENS:
        return None
    try:
        value = float(token)
    except ValueError:
        raise RowParseError(line_number, f"column {column!r}: cannot parse {token!r} as a number") from None
    if not math.isfinite(value):
        return None
    return value


def parse_ohlc_csv(text: str) -> List[OhlcBar]:
    """Parse a `Date,Open,High,Low,Close,Adj Close,Volume` export.

    `Adj Close` is used as the close when the cell is present, else `Close`.
    Rows come back in file order; empty and `null` cells become None.
    """
    if not text or not text.strip():
        raise DataFormatError("missing header row")
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError("missing header row") from None
    except pd.errors.ParserError as e:
        raise DataFormatError(f"malformed CSV: {e}") from None

    frame.columns = [str(c).strip() for c in frame.columns]
    required = ["Date", "Open", "High", "Low"]
    missing = [c for c in required if c not in frame.columns]
    if missing or not ({"Close", "Adj Close"} & set(frame.columns)):
        raise DataFormatError(
            "missing header: expected Date,Open,High,Low,Close,Adj Close,Volume; "
            f"got {','.join(frame.columns)}"
        )
    if frame.empty:
        raise EmptyInputError("the file has a header but no data rows")

    has_adj = "Adj Close" in frame.columns
    has_close = "Close" in frame.columns
    has_volume = "Volume" in frame.columns

    bars = []
    # Line 1 is the header
    for offset, row in enumerate(frame.itertuples(index=False)):
        line_number = offset + 2
        cells = dict(zip(frame.columns, row))
        raw_date = str(cells["Date"]).strip()
        try:
            day = datetime.strptime(raw_date, DATE_FORMAT).date()
        except ValueError:
            raise RowParseError(line_number, f"unparseable date {raw_date!r}") from None

        close = _parse_number(cells["Adj Close"], line_number, "Adj Close") if has_adj else None
        if close is None and has_close:
            close = _parse_number(cells["Close"], line_number, "Close")

        bars.append(
            OhlcBar(
                date=day,
                open=_parse_number(cells["Open"], line_number, "Open"),
                high=_parse_number(cells["High"], line_number, "High"),
                low=_parse_number(cells["Low"], line_number, "Low"),
                close=close,
                volume=_parse_number(cells["Volume"], line_number, "Volume") if has_volume else None,
            )
        )
    return bars


def forward_fill(bars: Sequence[OhlcBar], report: Optional[ValidationReport] = None) -> List[OhlcBar]:
    """Sort by date, keep the last of duplicate dates, and forward-fill gaps.

    Rows whose price fields have no earlier value to copy are dropped and
    recorded in `report`. Volume is filled the same way but never causes a
    drop.
    """
    if not bars:
        raise EmptyInputError("no bars to fill")
    if all(bar.close is None for bar in bars):
        raise UnrecoverableDataError("every close value is missing")

    # Stable sort keeps file order inside a date, so the dict keeps the last
    by_date: Dict[date, OhlcBar] = {}
    duplicates = []
    for bar in sorted(bars, key=lambda b: b.date):
        if bar.date in by_date and bar.date.isoformat() not in duplicates:
            duplicates.append(bar.date.isoformat())
        by_date[bar.date] = bar
    if duplicates:
        logger.warning("%d duplicate date(s); keeping the last occurrence of each", len(duplicates))

    ordered = list(by_date.values())
    columns = PRICE_FIELDS + ("volume",)
    frame = pd.DataFrame(
        [[np.nan if getattr(bar, name) is None else getattr(bar, name) for name in columns] for bar in ordered],
        columns=list(columns),
        dtype=np.float64,
    )
    missing_before = int(frame.isna().sum().sum())
    filled = frame.ffill()
    leading = filled[list(PRICE_FIELDS)].isna().any(axis=1).to_numpy()

    result = []
    dropped = []
    for bar, keep, values in zip(ordered, ~leading, filled.itertuples(index=False)):
        if not keep:
            dropped.append(bar.date.isoformat())
            continue
        volume = None if math.isnan(values.volume) else float(values.volume)
        result.append(
            OhlcBar(
                date=bar.date,
                open=float(values.open),
                high=float(values.high),
                low=float(values.low),
                close=float(values.close),
                volume=volume,
            )
        )

    if dropped:
        logger.warning("dropped %d leading row(s) with no earlier value to carry forward", len(dropped))
    if not result:
        raise UnrecoverableDataError("no rows left after forward fill")

    if report is not None:
        report.rows_in += len(bars)
        report.rows_out = len(result)
        report.filled_cells += missing_before - int(filled.isna().sum().sum())
        report.dropped_dates.extend(dropped)
        report.duplicate_dates.extend(duplicates)
    return result


def validate_bars(bars: Sequence[OhlcBar], report: Optional[ValidationReport] = None) -> ValidationReport:
    """Flag rows whose low/high do not bracket open and close"""
    report = report if report is not None else ValidationReport(rows_in=len(bars), rows_out=len(bars))
    for bar in bars:
        if bar.missing_fields():
            continue
        if bar.low > min(bar.open, bar.close) or bar.high < max(bar.open, bar.close):
            report.ohlc_violations.append(bar.date.isoformat())
    if report.ohlc_violations:
        logger.warning("%d bar(s) with inconsistent high/low (kept)", len(report.ohlc_violations))
    return report


def bars_to_series(bars: Sequence[OhlcBar], orientation: Orientation = Orientation.USD_PER_BDT) -> RateSeries:
    """Close-rate series from filled bars"""
    missing = [bar.date.isoformat() for bar in bars if bar.close is None]
    if missing:
        raise UnrecoverableDataError(f"close missing on {missing[0]}; run forward_fill first")
    return RateSeries(
        dates=tuple(bar.date for bar in bars),
        values=np.array([bar.close for bar in bars], dtype=np.float64),
        orientation=orientation,
    )


def invert_rates(series: RateSeries) -> RateSeries:
    """Reciprocal of every rate; flips the orientation"""
    _check_positive(series.dates, series.values)
    return RateSeries(
        dates=series.dates,
        values=1.0 / series.values,
        orientation=series.orientation.flipped(),
    )


def series_to_csv(series: RateSeries) -> str:
    lines = [f"# orientation={series.orientation.value}", "date,value"]
    for day, value in zip(series.dates, series.values):
        lines.append(f"{day.isoformat()},{value:.17g}")
    return "\n".join(lines) + "\n"


def series_from_csv(text: str) -> RateSeries:
    orientation = Orientation.USD_PER_BDT
    dates = []
    values = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key.strip() == "orientation":
                orientation = Orientation(value.strip())
            continue
        if line.startswith("date,"):
            continue
        raw_date, _, raw_value = line.partition(",")
        try:
            dates.append(datetime.strptime(raw_date, DATE_FORMAT).date())
            values.append(float(raw_value))
        except ValueError:
            raise RowParseError(line_number, f"bad series row {line!r}") from None
    return RateSeries(dates=tuple(dates), values=np.array(values), orientation=orientation)


def load_source(source: str, cache_dir: Optional[Path] = None) -> str:
    """Text of a local CSV file or of an http(s) URL (through the fetch cache)"""
    if source.startswith(("http://", "https://")):
        return fetch_remote(source, cache_dir)
    path = Path(source)
    if not path.is_file():
        raise SourceNotFoundError(f"input file not found: {path}")
    return decode_csv_bytes(path.read_bytes(), str(path))


def clean_series(text: str, invert: bool = True) -> Tuple[RateSeries, ValidationReport]:
    """parse -> forward fill -> validate -> (optionally) invert"""
    bars = parse_ohlc_csv(text)
    report = ValidationReport()
    filled = forward_fill(bars, report)
    validate_bars(filled, report)
    series = bars_to_series(filled)
    if invert:
        series = invert_rates(series)
    return series, report
