"""Raw meter reading ingestion: parsing, 5-minute grid alignment, day labelling
and peak-period window extraction."""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
import logging
from dataclasses import dataclass, field
from zoneinfo import ZoneInfo

import numpy as np

log = logging.getLogger(__name__)

GRID_SECONDS = 300
DEFAULT_TIMEZONE = "Europe/London"
DEFAULT_MAX_GAP_MINUTES = 15
DEFAULT_MIN_DAYS = 4
DEFAULT_REJECT_FRACTION = 0.10

SEASON_BY_MONTH = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "autumn", 10: "autumn", 11: "autumn",
}


class IngestError(Exception):
    pass


@dataclass(frozen=True)
class RawReading:
    household_id: str
    timestamp: dt.datetime  # timezone-aware
    power: float  # watts


@dataclass(frozen=True)
class RejectedRow:
    line_number: int
    line: str
    reason: str


@dataclass
class ParseResult:
    readings: list[RawReading]
    rejects: list[RejectedRow]
    total_rows: int


@dataclass
class AlignedSeries:
    """One household's power on an exact 5-minute grid.

    ``grid_start`` is the epoch second of the first slot boundary; slot i
    covers [grid_start + 300*i, grid_start + 300*(i+1)).
    """
    household_id: str
    grid_start: int
    values: np.ndarray
    gaps: frozenset[int]

    def slot_epoch(self, i: int) -> int:
        return self.grid_start + GRID_SECONDS * i

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DayLabel:
    date: dt.date
    day_type: str  # working | weekend | holiday
    season: str  # spring | summer | autumn | winter


@dataclass
class PeakDayWindow:
    household_id: str
    date: dt.date
    readings: np.ndarray  # one value per 5-minute slot, peak_start..peak_end inclusive
    valid: bool


def _parse_timestamp(text: str) -> dt.datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    ts = dt.datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError("timestamp lacks timezone offset")
    return ts


def open_readings(path: str) -> io.TextIOBase:
    """Open a readings CSV, transparently decompressing ``.gz`` files."""
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8")
    return open(path, encoding="utf-8")


def parse_readings(
    stream,
    has_header: bool | None = None,
    max_reject_fraction: float = DEFAULT_REJECT_FRACTION,
) -> ParseResult:
    """Parse ``household_id,timestamp_iso8601,watts`` rows.

    Malformed rows are collected in the rejects report rather than aborting;
    exceeding ``max_reject_fraction`` of rows is a hard error. With
    ``has_header=None`` a header row is auto-detected from the first line.
    """
    readings: list[RawReading] = []
    rejects: list[RejectedRow] = []
    total = 0
    for line_number, row in enumerate(csv.reader(stream), start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if line_number == 1:
            looks_like_header = not _is_data_row(row)
            if has_header is True or (has_header is None and looks_like_header):
                continue
        total += 1
        line = ",".join(row)
        if len(row) != 3:
            rejects.append(RejectedRow(line_number, line, "expected 3 fields"))
            continue
        hid, ts_text, watts_text = (f.strip() for f in row)
        try:
            ts = _parse_timestamp(ts_text)
        except ValueError:
            rejects.append(RejectedRow(line_number, line, "bad timestamp"))
            continue
        try:
            watts = float(watts_text)
        except ValueError:
            rejects.append(RejectedRow(line_number, line, "bad power value"))
            continue
        if not np.isfinite(watts) or watts < 0:
            rejects.append(RejectedRow(line_number, line, "power must be finite and >= 0"))
            continue
        if not hid:
            rejects.append(RejectedRow(line_number, line, "empty household id"))
            continue
        readings.append(RawReading(hid, ts, watts))
    if total and len(rejects) / total > max_reject_fraction:
        raise IngestError(
            f"{len(rejects)}/{total} rows rejected, above the "
            f"{max_reject_fraction:.0%} threshold"
        )
    return ParseResult(readings, rejects, total)


def _is_data_row(row: list[str]) -> bool:
    if len(row) != 3:
        return False
    try:
        _parse_timestamp(row[1].strip())
        float(row[2].strip())
    except ValueError:
        return False
    return True


def group_by_household(readings: list[RawReading]) -> dict[str, list[RawReading]]:
    grouped: dict[str, list[RawReading]] = {}
    for r in readings:
        grouped.setdefault(r.household_id, []).append(r)
    for rs in grouped.values():
        rs.sort(key=lambda r: r.timestamp)
    return grouped


def align_to_grid(
    readings: list[RawReading],
    max_gap_minutes: float = DEFAULT_MAX_GAP_MINUTES,
) -> AlignedSeries | None:
    """Resample one household's readings onto exact 5-minute boundaries.

    Power is modelled as piecewise constant: a reading holds until the next
    one. Each grid slot takes the average of that step function over its
    5-minute cell, which conserves total energy over any span bounded by raw
    timestamps. Slot boundaries with no raw reading within ``max_gap_minutes``
    on both sides are marked as gaps.
    """
    if len(readings) < 2:
        if readings:
            log.warning(
                "household %s dropped: fewer than 2 readings",
                readings[0].household_id,
            )
        return None
    hid = readings[0].household_id
    t = np.array([r.timestamp.timestamp() for r in readings])
    p = np.array([r.power for r in readings])
    # dedup identical timestamps, keeping the first occurrence
    keep = np.concatenate(([True], np.diff(t) > 0))
    t, p = t[keep], p[keep]
    if len(t) < 2:
        log.warning("household %s dropped: fewer than 2 distinct timestamps", hid)
        return None

    grid_start = int(np.floor(t[0] / GRID_SECONDS) * GRID_SECONDS)
    grid_last = int(np.floor(t[-1] / GRID_SECONDS) * GRID_SECONDS)
    n_slots = (grid_last - grid_start) // GRID_SECONDS + 1
    boundaries = grid_start + GRID_SECONDS * np.arange(n_slots + 1, dtype=np.int64)

    # cumulative energy of the step function is piecewise linear in time;
    # extend with edge powers so every cell is covered
    cum = np.concatenate(([0.0], np.cumsum(p[:-1] * np.diff(t))))
    knots_t = np.concatenate(([boundaries[0] - GRID_SECONDS], t, [boundaries[-1]]))
    knots_c = np.concatenate(
        ([cum[0] - p[0] * (t[0] - knots_t[0])], cum, [cum[-1] + p[-1] * (knots_t[-1] - t[-1])])
    )
    energy = np.interp(boundaries.astype(float), knots_t, knots_c)
    values = np.diff(energy) / GRID_SECONDS

    # cells spanned by a single reading are constant: take the power exactly,
    # avoiding round-off so grid-aligned input round-trips bit for bit
    cell_start = boundaries[:-1].astype(float)
    j = np.searchsorted(t, cell_start, side="right") - 1
    jc = np.clip(j, 0, len(t) - 1)
    next_t = np.where(jc + 1 < len(t), t[np.minimum(jc + 1, len(t) - 1)], np.inf)
    constant = (j >= 0) & (next_t >= cell_start + GRID_SECONDS)
    values[constant] = p[jc[constant]]

    max_gap = max_gap_minutes * 60.0
    slot_times = boundaries[:-1].astype(float)
    idx = np.searchsorted(t, slot_times, side="right")
    prev_dist = np.where(idx > 0, slot_times - t[np.maximum(idx - 1, 0)], np.inf)
    # a reading exactly at the slot boundary covers both sides
    nxt = np.searchsorted(t, slot_times, side="left")
    next_dist = np.where(nxt < len(t), t[np.minimum(nxt, len(t) - 1)] - slot_times, np.inf)
    is_gap = (prev_dist > max_gap) | (next_dist > max_gap)
    return AlignedSeries(hid, grid_start, values, frozenset(np.flatnonzero(is_gap).tolist()))


def read_holiday_file(path: str) -> set[dt.date]:
    """Holiday list: one ISO date per line, ``#`` comments allowed."""
    holidays: set[dt.date] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.split("#", 1)[0].strip()
            if text:
                holidays.add(dt.date.fromisoformat(text))
    return holidays


def label_days(dates, holidays: set[dt.date] | None = None) -> dict[dt.date, DayLabel]:
    holidays = holidays or set()
    labels = {}
    for date in dates:
        if date in holidays:
            day_type = "holiday"
        elif date.weekday() >= 5:
            day_type = "weekend"
        else:
            day_type = "working"
        labels[date] = DayLabel(date, day_type, SEASON_BY_MONTH[date.month])
    return labels


def _parse_clock(text: str) -> int:
    """'16:00' -> minutes after midnight, requiring a 5-minute boundary."""
    hh, mm = text.split(":")
    minutes = int(hh) * 60 + int(mm)
    if minutes % 5 != 0:
        raise IngestError(f"clock time {text!r} is not on a 5-minute boundary")
    return minutes


def series_dates(series: AlignedSeries, tz: ZoneInfo) -> list[dt.date]:
    """Local calendar dates spanned by the aligned series, inclusive."""
    first = dt.datetime.fromtimestamp(series.slot_epoch(0), tz).date()
    last = dt.datetime.fromtimestamp(series.slot_epoch(len(series) - 1), tz).date()
    return [first + dt.timedelta(days=i) for i in range((last - first).days + 1)]


def extract_peak_windows(
    series: AlignedSeries,
    labels: dict[dt.date, DayLabel],
    season: str | None = "spring",
    day_type: str | None = "working",
    peak_start: str = "16:00",
    peak_end: str = "20:00",
    timezone: str = DEFAULT_TIMEZONE,
) -> list[PeakDayWindow]:
    """One window per matching date, peak_start..peak_end inclusive.

    A window overlapping a gap slot, or reaching outside the aligned span,
    has ``valid=False``.
    """
    start_min = _parse_clock(peak_start)
    end_min = _parse_clock(peak_end)
    if start_min >= end_min:
        raise IngestError("peak_start must precede peak_end")
    n_readings = (end_min - start_min) // 5 + 1
    tz = ZoneInfo(timezone)
    windows = []
    for date in series_dates(series, tz):
        label = labels.get(date)
        if label is None:
            continue
        if season is not None and label.season != season:
            continue
        if day_type is not None and label.day_type != day_type:
            continue
        local_start = dt.datetime(
            date.year, date.month, date.day,
            start_min // 60, start_min % 60, tzinfo=tz,
        )
        first_epoch = int(local_start.timestamp())
        if (first_epoch - series.grid_start) % GRID_SECONDS != 0:
            continue  # DST edge where local peak start misses the grid
        i0 = (first_epoch - series.grid_start) // GRID_SECONDS
        idx = np.arange(i0, i0 + n_readings)
        readings = np.zeros(n_readings)
        in_range = (idx >= 0) & (idx < len(series))
        readings[in_range] = series.values[idx[in_range]]
        valid = bool(in_range.all()) and not any(
            int(i) in series.gaps for i in idx[in_range]
        )
        windows.append(PeakDayWindow(series.household_id, date, readings, valid))
    return windows


def filter_households(
    windows_by_household: dict[str, list[PeakDayWindow]],
    min_days: int = DEFAULT_MIN_DAYS,
) -> set[str]:
    """Households with at least ``min_days`` valid peak windows."""
    return {
        hid for hid, ws in windows_by_household.items()
        if sum(1 for w in ws if w.valid) >= min_days
    }
