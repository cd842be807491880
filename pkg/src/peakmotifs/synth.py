"""Synthetic household generator with controlled behavioural archetypes.

Households consume a flat base load plus rectangular consumption events whose
daily start times are fixed anchors perturbed by Gaussian jitter. The jitter
standard deviation is the archetype's behavioural variability, giving a
ground truth against which pipeline output can be scored.
"""

from __future__ import annotations

import configparser
import datetime as dt
from dataclasses import dataclass, field
from zoneinfo import ZoneInfo

import numpy as np

from .ingest import DEFAULT_TIMEZONE, _parse_clock

DEFAULT_EMIT_MARGIN_MINUTES = 30
READING_NOISE_FRACTION = 0.02
EVENT_ANCHOR_MARGIN_MINUTES = 15


@dataclass
class ArchetypeSpec:
    name: str
    n_households: int
    base_load: float  # watts
    events_min: int
    events_max: int
    height_min: float
    height_max: float
    duration_min: float  # minutes
    duration_max: float
    timing_jitter_sd: float  # minutes
    height_day_sd: float = 0.0  # day-to-day watt variation of event height


@dataclass
class Scenario:
    archetypes: list[ArchetypeSpec]
    days: int
    seed: int
    start_date: dt.date = dt.date(2011, 3, 1)
    timezone: str = DEFAULT_TIMEZONE
    peak_start: str = "16:00"
    peak_end: str = "20:00"
    emit_margin_minutes: int = DEFAULT_EMIT_MARGIN_MINUTES
    holidays: set[dt.date] = field(default_factory=set)


@dataclass
class GroundTruth:
    archetype_of: dict[str, str]

    def labels_for(self, ids: list[str]) -> list[str]:
        return [self.archetype_of[hid] for hid in ids]


def _pair(text: str) -> tuple[float, float]:
    parts = text.split()
    if len(parts) == 1:
        return float(parts[0]), float(parts[0])
    return float(parts[0]), float(parts[1])


def load_scenario(path: str) -> Scenario:
    """Read a scenario file (INI key-value format, one ``[archetype:NAME]``
    section per archetype)."""
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    sc = cp["scenario"]
    archetypes = []
    for section in cp.sections():
        if not section.startswith("archetype:"):
            continue
        a = cp[section]
        ev_lo, ev_hi = _pair(a.get("events_per_day", "1"))
        h_lo, h_hi = _pair(a["event_height"])
        d_lo, d_hi = _pair(a.get("event_duration", "30 60"))
        archetypes.append(
            ArchetypeSpec(
                name=section.split(":", 1)[1],
                n_households=a.getint("households"),
                base_load=a.getfloat("base_load", 100.0),
                events_min=int(ev_lo), events_max=int(ev_hi),
                height_min=h_lo, height_max=h_hi,
                duration_min=d_lo, duration_max=d_hi,
                timing_jitter_sd=a.getfloat("timing_jitter_sd"),
                height_day_sd=a.getfloat("height_day_sd", 0.0),
            )
        )
    if not archetypes:
        raise ValueError(f"scenario {path!r} defines no archetypes")
    return Scenario(
        archetypes=archetypes,
        days=sc.getint("days"),
        seed=sc.getint("seed", 0),
        start_date=dt.date.fromisoformat(sc.get("start_date", "2011-03-01")),
        timezone=sc.get("timezone", DEFAULT_TIMEZONE),
        peak_start=sc.get("peak_start", "16:00"),
        peak_end=sc.get("peak_end", "20:00"),
        emit_margin_minutes=sc.getint("emit_margin_minutes", DEFAULT_EMIT_MARGIN_MINUTES),
    )


def working_dates(start: dt.date, count: int, holidays: set[dt.date] = frozenset()) -> list[dt.date]:
    dates = []
    d = start
    while len(dates) < count:
        if d.weekday() < 5 and d not in holidays:
            dates.append(d)
        d += dt.timedelta(days=1)
    return dates


@dataclass
class _Household:
    hid: str
    spec: ArchetypeSpec
    anchors: list[tuple[float, float, float]]  # (start minute, duration, height)
    rng: np.random.Generator


def _plan_households(scenario: Scenario) -> list[_Household]:
    lo_min = _parse_clock(scenario.peak_start) + EVENT_ANCHOR_MARGIN_MINUTES
    hi_min = _parse_clock(scenario.peak_end) - EVENT_ANCHOR_MARGIN_MINUTES
    total = sum(a.n_households for a in scenario.archetypes)
    children = np.random.SeedSequence(scenario.seed).spawn(total)
    households = []
    i = 0
    for spec in scenario.archetypes:
        for j in range(spec.n_households):
            rng = np.random.default_rng(children[i])
            i += 1
            n_events = int(rng.integers(spec.events_min, spec.events_max + 1))
            anchors = []
            for _ in range(n_events):
                duration = float(rng.uniform(spec.duration_min, spec.duration_max))
                start = float(rng.uniform(lo_min, hi_min - duration))
                height = float(rng.uniform(spec.height_min, spec.height_max))
                anchors.append((start, duration, height))
            households.append(_Household(f"{spec.name}-{j:03d}", spec, anchors, rng))
    return households


def generate(scenario: Scenario, out) -> GroundTruth:
    """Write raw readings in the ingest CSV format to the text stream ``out``
    and return the household-to-archetype ground truth. Deterministic given
    the scenario seed."""
    tz = ZoneInfo(scenario.timezone)
    dates = working_dates(scenario.start_date, scenario.days, scenario.holidays)
    emit_lo = _parse_clock(scenario.peak_start) - scenario.emit_margin_minutes
    emit_hi = _parse_clock(scenario.peak_end) + scenario.emit_margin_minutes
    sample_minutes = np.arange(emit_lo, emit_hi + 5, 5)
    households = _plan_households(scenario)

    out.write("household_id,timestamp,watts\n")
    for hh in households:
        spec = hh.spec
        lo_min = _parse_clock(scenario.peak_start)
        hi_min = _parse_clock(scenario.peak_end)
        for date in dates:
            power = np.full(len(sample_minutes), spec.base_load)
            for anchor, duration, height in hh.anchors:
                start = float(np.clip(
                    anchor + hh.rng.normal(0.0, spec.timing_jitter_sd),
                    lo_min, hi_min - duration,
                ))
                day_height = max(
                    height + (hh.rng.normal(0.0, spec.height_day_sd)
                              if spec.height_day_sd > 0 else 0.0),
                    50.0,
                )
                active = (sample_minutes >= start) & (sample_minutes < start + duration)
                power = power + np.where(active, day_height, 0.0)
            noise = 1.0 + hh.rng.uniform(-READING_NOISE_FRACTION,
                                         READING_NOISE_FRACTION, len(power))
            power = power * noise
            for minute, watts in zip(sample_minutes, power):
                ts = dt.datetime(
                    date.year, date.month, date.day,
                    int(minute) // 60, int(minute) % 60, tzinfo=tz,
                )
                out.write(f"{hh.hid},{ts.isoformat()},{watts:.3f}\n")
    return GroundTruth({hh.hid: hh.spec.name for hh in households})


def write_ground_truth(truth: GroundTruth, out) -> None:
    out.write("household_id,archetype\n")
    for hid in sorted(truth.archetype_of):
        out.write(f"{hid},{truth.archetype_of[hid]}\n")
