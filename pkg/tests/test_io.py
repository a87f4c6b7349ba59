"""Tests for dated frames, CSV round-trips, and date parsing."""
import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpsent.errors import (
    DuplicateDate,
    NonNumericCell,
    ParseError,
    ZeroVariance,
)
from mpsent.io import (
    TimeSeriesFrame,
    emit_frame,
    frame_from_columns,
    load_frame,
    parse_date,
    quarterly_dates,
    standardize,
)


def make_frame(n=8, start="2001-01-01", **cols):
    if not cols:
        cols = {"a": np.arange(n, dtype=float)}
    return frame_from_columns(quarterly_dates(start, n), cols)


class TestParseDate:
    def test_quarter_label(self):
        assert parse_date("2003-Q2") == pd.Timestamp("2003-04-01")

    def test_quarter_label_no_dash(self):
        assert parse_date("1993Q4") == pd.Timestamp("1993-10-01")

    def test_quarter_label_lowercase(self):
        assert parse_date("1993q1") == pd.Timestamp("1993-01-01")

    def test_iso_date(self):
        assert parse_date("1987-06-30") == pd.Timestamp("1987-06-30")

    def test_garbage_raises(self):
        with pytest.raises(ParseError):
            parse_date("not-a-date")

    def test_quarter_five_raises(self):
        with pytest.raises(ParseError):
            parse_date("2003-Q5")


def test_quarterly_dates_spacing():
    dates = quarterly_dates("1999-Q4", 5)
    assert list(dates[:2]) == [pd.Timestamp("1999-10-01"), pd.Timestamp("2000-01-01")]
    assert len(dates) == 5


class TestTimeSeriesFrame:
    def test_sorts_unordered_dates(self):
        idx = pd.DatetimeIndex(["2001-04-01", "2001-01-01"])
        frame = TimeSeriesFrame(pd.DataFrame({"a": [2.0, 1.0]}, index=idx))
        assert list(frame.column("a")) == [1.0, 2.0]

    def test_duplicate_dates_rejected(self):
        idx = pd.DatetimeIndex(["2001-01-01", "2001-01-01"])
        with pytest.raises(DuplicateDate):
            TimeSeriesFrame(pd.DataFrame({"a": [1.0, 2.0]}, index=idx))

    def test_non_numeric_column_rejected(self):
        idx = pd.DatetimeIndex(["2001-01-01"])
        with pytest.raises(NonNumericCell):
            TimeSeriesFrame(pd.DataFrame({"a": ["x"]}, index=idx))

    def test_non_date_index_rejected(self):
        with pytest.raises(ParseError):
            TimeSeriesFrame(pd.DataFrame({"a": [1.0]}, index=[0]))

    def test_column_missing_raises_keyerror(self):
        with pytest.raises(KeyError):
            make_frame().column("zz")

    def test_values_column_order(self):
        frame = make_frame(3, a=np.ones(3), b=np.arange(3.0))
        out = frame.values(["b", "a"])
        assert out.shape == (3, 2)
        assert list(out[:, 1]) == [1.0, 1.0, 1.0]

    def test_with_columns_appends(self):
        frame = make_frame(4).with_columns({"b": np.full(4, 2.0)})
        assert frame.columns == ["a", "b"]

    def test_complete_rows_drops_nan(self):
        col = np.array([1.0, math.nan, 3.0])
        frame = make_frame(3, a=col)
        assert len(frame.complete_rows()) == 2


class TestCsvRoundTrip:
    def test_load_emitted_file_bit_exact(self, tmp_path):
        rng = np.random.default_rng(7)
        frame = make_frame(12, a=rng.standard_normal(12), b=rng.standard_normal(12) * 1e-7)
        path = tmp_path / "frame.csv"
        emit_frame(frame, str(path))
        loaded = load_frame(str(path))
        assert loaded.columns == frame.columns
        assert np.array_equal(loaded.values(), frame.values())

    @settings(max_examples=60, deadline=None)
    @given(st.floats(allow_nan=False, allow_infinity=False, width=64))
    def test_repr_formatting_round_trips(self, value):
        frame = make_frame(1, a=np.array([value]))
        assert frame.column("a")[0] == float(repr(value))

    def test_missing_cells_become_nan(self, tmp_path):
        path = tmp_path / "gap.csv"
        path.write_text("date,a,b\n2001-01-01,1.5,\n2001-04-01,,2.5\n")
        frame = load_frame(str(path))
        assert math.isnan(frame.column("b")[0])
        assert math.isnan(frame.column("a")[1])

    def test_quarter_labels_accepted(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("date,a\n2001-Q1,1.0\n2001-Q2,2.0\n")
        assert list(load_frame(str(path)).dates) == list(quarterly_dates("2001-Q1", 2))

    def test_unordered_rows_sorted(self, tmp_path):
        path = tmp_path / "uo.csv"
        path.write_text("date,a\n2001-Q2,2.0\n2001-Q1,1.0\n")
        assert list(load_frame(str(path)).column("a")) == [1.0, 2.0]

    def test_ragged_row_reports_row_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("date,a,b\n2001-01-01,1.0,2.0\n2001-04-01,3.0\n")
        with pytest.raises(ParseError, match="row 3"):
            load_frame(str(path))

    def test_non_numeric_cell_reports_location(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("date,a\n2001-01-01,oops\n")
        with pytest.raises(NonNumericCell, match="row 2"):
            load_frame(str(path))

    def test_duplicate_date_rejected(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text("date,a\n2001-01-01,1.0\n2001-01-01,2.0\n")
        with pytest.raises(DuplicateDate):
            load_frame(str(path))

    def test_missing_date_column_rejected(self, tmp_path):
        path = tmp_path / "nodate.csv"
        path.write_text("when,a\n2001-01-01,1.0\n")
        with pytest.raises(ParseError, match="date"):
            load_frame(str(path))

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            load_frame(str(path))


class TestStandardize:
    def test_mean_zero_unit_sample_sd(self):
        rng = np.random.default_rng(3)
        frame = make_frame(40, a=rng.standard_normal(40) * 3 + 1, b=np.arange(40.0))
        out = standardize(frame, ["a"])
        col = out.column("a")
        assert abs(col.mean()) < 1e-12
        assert abs(np.std(col, ddof=1) - 1.0) < 1e-12
        assert np.array_equal(out.column("b"), frame.column("b"))

    def test_constant_column_rejected(self):
        frame = make_frame(5, a=np.ones(5))
        with pytest.raises(ZeroVariance):
            standardize(frame, ["a"])
