"""Per-household motif catalogs and the three feature representations:
motif variability, average load profile, and non-motif variability."""

from __future__ import annotations

import datetime as dt
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .ingest import PeakDayWindow
from .sax import WindowOccurrence

PROFILE_SLOTS = 48

MOTIF_FEATURE_NAMES = ["f1", "f2", "f3", "f4", "f5", "f6", "f7", "f8"]
PROFILE_FEATURE_NAMES = [f"p{i:02d}" for i in range(PROFILE_SLOTS)]
NONMOTIF_FEATURE_NAMES = ["tmax_sd", "total_sd"]


@dataclass
class MotifCatalog:
    household_id: str
    entries: dict[str, list[tuple[dt.date, int]]] = field(default_factory=dict)
    days_sampled: int = 0


@dataclass
class MotifFeatures:
    """The 8 motif-variability attributes: occurrence count and timing sd
    (minutes) for the three most frequent motifs, the number of motifs
    occurring at least twice, and the number occurring on >= 30% of days."""
    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    f7: float
    f8: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.f3, self.f4,
                         self.f5, self.f6, self.f7, self.f8])


@dataclass
class ProfileFeatures:
    values: np.ndarray  # 48 averaged readings, peak start..end-5min

    def as_array(self) -> np.ndarray:
        return self.values


@dataclass
class NonMotifFeatures:
    time_of_max_sd: float  # minutes
    daily_total_sd: float

    def as_array(self) -> np.ndarray:
        return np.array([self.time_of_max_sd, self.daily_total_sd])


def build_catalog(
    household_id: str,
    occurrences: list[WindowOccurrence],
    days_sampled: int,
) -> MotifCatalog:
    """Group occurrences by word, each list sorted by (date, start_clock)."""
    entries: dict[str, list[tuple[dt.date, int]]] = {}
    for occ in sorted(occurrences, key=lambda o: (o.date, o.start_clock)):
        entries.setdefault(occ.word, []).append((occ.date, occ.start_clock))
    return MotifCatalog(household_id, entries, days_sampled)


def _single_spike(word: str) -> tuple[str, int] | None:
    """(spike letter, position) if the word is one letter repeated except at
    a single position, else None."""
    counts = Counter(word)
    if len(counts) != 2:
        return None
    _, (b, nb) = counts.most_common()
    if nb != 1:
        return None
    return b, word.index(b)


def exclude_trivial(catalog: MotifCatalog) -> MotifCatalog:
    """Collapse single-spike families produced by a sliding window passing an
    isolated step change, keeping only the canonical spike-at-last-position
    member (the earliest window covering the step)."""
    entries = {}
    for word, occs in catalog.entries.items():
        spike = _single_spike(word)
        if spike is not None and spike[1] != len(word) - 1:
            continue
        entries[word] = occs
    return MotifCatalog(catalog.household_id, entries, catalog.days_sampled)


def timing_sd(start_minutes: list[int]) -> float:
    """Population standard deviation of start times, in minutes."""
    if not start_minutes:
        raise ValueError("timing_sd of an empty occurrence list is undefined")
    return float(np.std(start_minutes))


def motif_features(catalog: MotifCatalog, coverage_fraction: float = 0.30) -> MotifFeatures:
    """Rank motifs by occurrence count (ties lexicographic); missing top-3
    slots are zero-filled."""
    ranked = sorted(catalog.entries.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    top = [(0.0, 0.0)] * 3
    for i, (word, occs) in enumerate(ranked[:3]):
        top[i] = (float(len(occs)), timing_sd([m for _, m in occs]))
    f7 = sum(1 for occs in catalog.entries.values() if len(occs) >= 2)
    day_threshold = math.ceil(coverage_fraction * catalog.days_sampled)
    f8 = sum(
        1 for occs in catalog.entries.values()
        if len({d for d, _ in occs}) >= day_threshold
    )
    return MotifFeatures(
        f1=top[0][0], f2=top[0][1],
        f3=top[1][0], f4=top[1][1],
        f5=top[2][0], f6=top[2][1],
        f7=float(f7), f8=float(f8),
    )


def profile_features(windows: list[PeakDayWindow]) -> ProfileFeatures:
    """Slot-wise mean over valid days; the final (peak-end) reading is not
    part of the profile."""
    valid = [w.readings[:PROFILE_SLOTS] for w in windows if w.valid]
    if not valid:
        raise ValueError("no valid windows to average")
    return ProfileFeatures(np.mean(valid, axis=0))


def nonmotif_features(windows: list[PeakDayWindow]) -> NonMotifFeatures:
    """Timing-of-maximum and daily-total variability over valid days."""
    valid = [w.readings for w in windows if w.valid]
    if not valid:
        raise ValueError("no valid windows")
    tmax = [5.0 * int(np.argmax(r)) for r in valid]  # first slot on ties
    totals = [float(np.sum(r)) for r in valid]
    return NonMotifFeatures(float(np.std(tmax)), float(np.std(totals)))


def spearman_rho(x, y) -> float:
    """Rank correlation with average-rank ties; NaN when a rank variance is
    zero (undefined)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) != len(y) or len(x) < 3:
        raise ValueError("spearman_rho needs two equal-length vectors, n >= 3")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", stats.ConstantInputWarning)
        rho = stats.spearmanr(x, y).statistic
    return float(rho)
