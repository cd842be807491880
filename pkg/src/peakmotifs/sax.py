"""Symbolization of peak-period consumption changes into motif words.

Each valid peak-day window is first-differenced, a 6-reading window slides
across the deltas, and every window clearing the noise floor is z-normalized
and discretized against standard-normal breakpoints.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .ingest import PeakDayWindow

ALPHABET = "abcdefghij"


class SaxConfigError(Exception):
    pass


@dataclass(frozen=True)
class SaxParams:
    alphabet_size: int = 5
    motif_len: int = 6
    noise_floor_watts: float = 100.0
    include_final_window: bool = False


@dataclass
class DeltaSeries:
    household_id: str
    date: dt.date
    deltas: np.ndarray  # reading[i+1] - reading[i]


@dataclass(frozen=True)
class WindowOccurrence:
    household_id: str
    date: dt.date
    start_slot: int
    start_clock: int  # minutes after peak start
    word: str
    range_watts: float


def breakpoints(alphabet_size: int) -> np.ndarray:
    """Standard-normal quantiles at i/alphabet_size, i = 1..alphabet_size-1."""
    if not 2 <= alphabet_size <= 10:
        raise SaxConfigError(f"alphabet size must be in [2, 10], got {alphabet_size}")
    return norm.ppf(np.arange(1, alphabet_size) / alphabet_size)


def difference(window: PeakDayWindow) -> DeltaSeries | None:
    """Adjacent-reading changes; None for invalid windows."""
    if not window.valid:
        return None
    return DeltaSeries(window.household_id, window.date, np.diff(window.readings))


def symbolize_window(
    deltas: np.ndarray,
    bps: np.ndarray,
    noise_floor_watts: float = 100.0,
) -> str | None:
    """Convert one fixed-length delta window to a word, or None if filtered.

    The noise floor applies to the raw (pre-normalization) delta range.
    Normalization is z-score with population standard deviation; a value
    exactly on a breakpoint maps to the lower letter.
    """
    deltas = np.asarray(deltas, dtype=float)
    rng = float(deltas.max() - deltas.min())
    if rng < noise_floor_watts:
        return None
    sd = float(deltas.std())
    if sd == 0.0:  # unreachable when rng > 0; guard anyway
        return None
    z = (deltas - deltas.mean()) / sd
    letters = np.searchsorted(bps, z, side="left")
    return "".join(ALPHABET[i] for i in letters)


def window_words(series: DeltaSeries, params: SaxParams = SaxParams()) -> list[WindowOccurrence]:
    """All motif occurrences for one day's delta series.

    48 deltas admit 43 length-6 windows; by default the final one is dropped
    so a fully valid day yields at most 42 occurrences (slots 0..41).
    """
    bps = breakpoints(params.alphabet_size)
    n_windows = len(series.deltas) - params.motif_len + 1
    if not params.include_final_window:
        n_windows -= 1
    occurrences = []
    for s in range(max(n_windows, 0)):
        chunk = series.deltas[s:s + params.motif_len]
        word = symbolize_window(chunk, bps, params.noise_floor_watts)
        if word is None:
            continue
        occurrences.append(
            WindowOccurrence(
                household_id=series.household_id,
                date=series.date,
                start_slot=s,
                start_clock=5 * s,
                word=word,
                range_watts=float(chunk.max() - chunk.min()),
            )
        )
    return occurrences
