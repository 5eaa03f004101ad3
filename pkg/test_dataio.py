#!/usr/bin/env python3
"""
Test script for OHLC loading, cleaning and the fetch cache
"""

import sys
from datetime import date

import numpy as np
import pytest
import requests

from dataio import fetcher
from dataio.ohlc_loader import (
    SAMPLE_DATA_PATH,
    OhlcBar,
    Orientation,
    RateSeries,
    ValidationReport,
    bars_to_series,
    clean_series,
    forward_fill,
    invert_rates,
    load_source,
    parse_ohlc_csv,
    series_from_csv,
    series_to_csv,
    validate_bars,
)
from utils.errors import (
    DataFormatError,
    DomainError,
    EmptyInputError,
    FetchError,
    RowParseError,
    SourceNotFoundError,
    UnrecoverableDataError,
)

HEADER = "Date,Open,High,Low,Close,Adj Close,Volume"


def csv_text(*rows):
    return "\n".join((HEADER,) + rows) + "\n"


def test_parse_prefers_adj_close():
    """Adj Close wins over Close when present"""
    bars = parse_ohlc_csv(csv_text("2020-01-02,1,2,0.5,1.5,1.4,10"))
    assert bars[0].close == pytest.approx(1.4)
    assert bars[0].volume == 10


def test_parse_falls_back_to_close():
    bars = parse_ohlc_csv(csv_text("2020-01-02,1,2,0.5,1.5,null,10"))
    assert bars[0].close == pytest.approx(1.5)


def test_parse_null_and_empty_cells_are_missing():
    bars = parse_ohlc_csv(csv_text("2020-01-02,null,,NaN,null,null,"))
    assert bars[0].missing_fields() == ["open", "high", "low", "close"]


def test_parse_missing_header():
    with pytest.raises(DataFormatError):
        parse_ohlc_csv("2020-01-02,1,2,0.5,1.5,1.4,10\n")
    with pytest.raises(DataFormatError):
        parse_ohlc_csv("")


def test_parse_header_only():
    with pytest.raises(EmptyInputError):
        parse_ohlc_csv(HEADER + "\n")


def test_parse_bad_number_reports_line():
    with pytest.raises(RowParseError) as info:
        parse_ohlc_csv(csv_text("2020-01-02,1,2,0.5,1.5,1.4,10", "2020-01-03,1,abc,0.5,1.5,1.4,10"))
    assert info.value.line_number == 3


def test_parse_bad_date():
    with pytest.raises(RowParseError):
        parse_ohlc_csv(csv_text("02/01/2020,1,2,0.5,1.5,1.4,10"))


def test_forward_fill_drops_leading_and_fills_gaps():
    """Leading nulls are dropped; later gaps copy the previous row"""
    text = csv_text(
        "2020-01-01,null,null,null,null,null,null",
        "2020-01-02,1,2,0.5,1.5,1.5,0",
        "2020-01-03,null,null,null,null,null,null",
        "2020-01-06,1.1,2.1,0.6,1.7,1.7,0",
    )
    report = ValidationReport()
    filled = forward_fill(parse_ohlc_csv(text), report)
    assert [b.date for b in filled] == [date(2020, 1, 2), date(2020, 1, 3), date(2020, 1, 6)]
    assert filled[1].close == 1.5
    assert report.dropped_dates == ["2020-01-01"]
    assert report.rows_in == 4
    assert report.rows_out == 3
    assert report.to_dict()["dropped_rows"] == 1


def test_forward_fill_sorts_and_keeps_last_duplicate():
    text = csv_text(
        "2020-01-03,1,2,0.5,1.8,1.8,0",
        "2020-01-02,1,2,0.5,1.5,1.5,0",
        "2020-01-02,1,2,0.5,1.6,1.6,0",
    )
    report = ValidationReport()
    filled = forward_fill(parse_ohlc_csv(text), report)
    assert [b.close for b in filled] == [1.6, 1.8]
    assert report.duplicate_dates == ["2020-01-02"]


def test_forward_fill_all_missing():
    text = csv_text("2020-01-02,null,null,null,null,null,null", "2020-01-03,null,null,null,null,null,null")
    with pytest.raises(UnrecoverableDataError):
        forward_fill(parse_ohlc_csv(text))


def test_validate_bars_flags_inconsistent_high_low():
    bars = [
        OhlcBar(date(2020, 1, 2), 1.0, 2.0, 0.5, 1.5, None),
        OhlcBar(date(2020, 1, 3), 1.0, 1.2, 0.5, 1.5, None),
    ]
    report = validate_bars(bars)
    assert report.ohlc_violations == ["2020-01-03"]


def test_invert_rates_flips_orientation():
    series = RateSeries((date(2020, 1, 2), date(2020, 1, 3)), np.array([80.0, 100.0]), Orientation.USD_PER_BDT)
    inverted = invert_rates(series)
    assert inverted.orientation is Orientation.BDT_PER_USD
    np.testing.assert_allclose(inverted.values, [0.0125, 0.01])
    twice = invert_rates(inverted)
    assert twice.orientation is Orientation.USD_PER_BDT
    np.testing.assert_allclose(twice.values, series.values, rtol=1e-15)


def test_rate_series_rejects_non_positive():
    with pytest.raises(DomainError):
        RateSeries((date(2020, 1, 2), date(2020, 1, 3)), np.array([1.0, 0.0]))


def test_rate_series_rejects_unordered_dates():
    with pytest.raises(DataFormatError):
        RateSeries((date(2020, 1, 3), date(2020, 1, 2)), np.array([1.0, 2.0]))


def test_bars_to_series_needs_filled_closes():
    bars = [OhlcBar(date(2020, 1, 2), 1.0, 2.0, 0.5, None, None), OhlcBar(date(2020, 1, 3), 1.0, 2.0, 0.5, 1.0, None)]
    with pytest.raises(UnrecoverableDataError):
        bars_to_series(bars)


def test_series_csv_round_trip_is_exact():
    series = RateSeries(
        (date(2020, 1, 2), date(2020, 1, 3), date(2020, 1, 6)),
        np.array([1 / 83.0, 1 / 84.3, 1 / 84.7]),
        Orientation.BDT_PER_USD,
    )
    text = series_to_csv(series)
    assert text.startswith("# orientation=BDT/USD\ndate,value\n")
    back = series_from_csv(text)
    assert back.dates == series.dates
    assert back.orientation is Orientation.BDT_PER_USD
    assert np.array_equal(back.values, series.values)


def test_clean_sample_file():
    """The bundled sample: three leading null rows, interior gaps filled"""
    series, report = clean_series(SAMPLE_DATA_PATH.read_text(encoding="utf-8"))
    assert report.rows_in == 1565
    assert len(report.dropped_dates) == 3
    assert len(series) == 1562
    assert report.filled_cells > 0
    assert series.orientation is Orientation.BDT_PER_USD
    assert np.all(series.values > 0.009)
    assert np.all(series.values < 0.0125)


def test_clean_without_inversion_keeps_raw_quote():
    series, _ = clean_series(SAMPLE_DATA_PATH.read_text(encoding="utf-8"), invert=False)
    assert series.orientation is Orientation.USD_PER_BDT
    assert series.values.min() > 80.0


def test_load_source_missing_file(tmp_path):
    with pytest.raises(SourceNotFoundError):
        load_source(str(tmp_path / "absent.csv"))


def test_load_source_rejects_latin1_file(tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes(csv_text("2020-01-02,1,2,0.5,1.5,1.4,10").encode("utf-8") + "caf\u00e9\n".encode("latin-1"))
    with pytest.raises(DataFormatError, match="0xe9"):
        load_source(str(path))


class _Response:
    def __init__(self, body: bytes, content_type: str = "text/csv"):
        self.content = body
        self.headers = {"Content-Type": content_type}

    def raise_for_status(self):
        pass


def test_fetch_writes_through_cache(tmp_path, monkeypatch):
    body = csv_text("2020-01-02,1,2,0.5,1.5,1.4,10").encode("utf-8")
    monkeypatch.setattr(fetcher.requests, "get", lambda url, timeout: _Response(body))
    url = "https://example.invalid/rates.csv"
    text = fetcher.fetch_remote(url, tmp_path)
    assert text == body.decode("utf-8")
    assert fetcher.cache_path_for(url, tmp_path).read_bytes() == body


def test_fetch_falls_back_to_cache(tmp_path, monkeypatch, caplog):
    url = "https://example.invalid/rates.csv"
    cached = fetcher.cache_path_for(url, tmp_path)
    cached.write_text("cached body", encoding="utf-8")

    def offline(url, timeout):
        raise requests.ConnectionError("offline")

    monkeypatch.setattr(fetcher.requests, "get", offline)
    assert fetcher.fetch_remote(url, tmp_path) == "cached body"
    assert "stale" in caplog.text


def test_fetch_rejects_non_utf8_body_without_caching(tmp_path, monkeypatch):
    monkeypatch.setattr(fetcher.requests, "get", lambda url, timeout: _Response(b"Date,Close\n\xe9\n"))
    url = "https://example.invalid/rates.csv"
    with pytest.raises(DataFormatError):
        fetcher.fetch_remote(url, tmp_path)
    assert not fetcher.cache_path_for(url, tmp_path).exists()


def test_fetch_rejects_non_utf8_cached_copy(tmp_path, monkeypatch):
    url = "https://example.invalid/rates.csv"
    fetcher.cache_path_for(url, tmp_path).write_bytes(b"\xe9")

    def offline(url, timeout):
        raise requests.ConnectionError("offline")

    monkeypatch.setattr(fetcher.requests, "get", offline)
    with pytest.raises(DataFormatError):
        fetcher.fetch_remote(url, tmp_path)


def test_fetch_without_cache_fails(tmp_path, monkeypatch):
    def offline(url, timeout):
        raise requests.ConnectionError("offline")

    monkeypatch.setattr(fetcher.requests, "get", offline)
    with pytest.raises(FetchError):
        fetcher.fetch_remote("https://example.invalid/rates.csv", tmp_path)


def test_fetch_rejects_malformed_url(tmp_path):
    with pytest.raises(FetchError):
        fetcher.fetch_remote("ftp:/nowhere", tmp_path)


def test_cache_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(fetcher.CACHE_ENV_VAR, str(tmp_path))
    assert fetcher.default_cache_dir() == tmp_path


if __name__ == "__main__":
    sys.exit(pytest.main([__file__]))
